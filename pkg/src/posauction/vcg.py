"""VCG allocation and externality prices under position constraints."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Mapping, Optional

from .assignment import max_weight_assignment
from .core import AuctionInstance, BidProfile, NotAssigned, Outcome


@dataclass(frozen=True)
class Matching:
    """Bidder-to-slot pairs, sorted by slot, with their total value."""

    pairs: tuple[tuple[int, int], ...]
    value: Fraction

    def __post_init__(self) -> None:
        pairs = tuple(sorted(self.pairs, key=lambda p: (p[1], p[0])))
        object.__setattr__(self, "pairs", pairs)
        if len({i for i, _ in pairs}) != len(pairs) or len({j for _, j in pairs}) != len(pairs):
            raise ValueError("matching is not injective")

    @property
    def slot_of_bidder(self) -> dict[int, int]:
        return {i: j for i, j in self.pairs}

    @property
    def bidder_at_slot(self) -> dict[int, int]:
        return {j: i for i, j in self.pairs}

    def slot_of(self, bidder_id: int) -> Optional[int]:
        return self.slot_of_bidder.get(bidder_id)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ValueModel:
    """Per-bidder value and allowed slot range for one matching problem.

    Either the true valuations and ranges, or declared bids and stated ranges.
    """

    values: Mapping[int, Fraction]
    ranges: Mapping[int, tuple[int, int]]

    @classmethod
    def truthful(cls, instance: AuctionInstance) -> "ValueModel":
        return cls(
            MappingProxyType({b.id: b.valuation for b in instance.bidders}),
            MappingProxyType({b.id: (b.range_start, b.cutoff) for b in instance.bidders}),
        )

    @classmethod
    def declared(cls, bids: BidProfile) -> "ValueModel":
        return cls(
            MappingProxyType({i: d.bid for i, d in bids.declarations.items()}),
            MappingProxyType(
                {i: (d.stated_range_start, d.stated_cutoff) for i, d in bids.declarations.items()}
            ),
        )

    def feasible(self, bidder_id: int, slot: int) -> bool:
        lo, hi = self.ranges[bidder_id]
        return lo <= slot <= hi


def _model(instance: AuctionInstance, bids: Optional[BidProfile]) -> ValueModel:
    return ValueModel.truthful(instance) if bids is None else ValueModel.declared(bids)


def bidder_ranks(instance: AuctionInstance) -> dict[int, int]:
    return {i: r for r, i in enumerate(sorted(instance.ids))}


def matching_value(
    pairs: Mapping[int, int], instance: AuctionInstance, values: Mapping[int, Fraction]
) -> Fraction:
    return sum((values[i] * instance.ctr(j) for i, j in pairs.items()), Fraction(0))


def solve_max_matching(
    instance: AuctionInstance,
    bids: Optional[BidProfile] = None,
    excluded: Optional[int] = None,
    reference: Optional[Matching] = None,
) -> Matching:
    """Maximum-value matching on valuations (``bids=None``) or declared bids.

    Among maximum-value matchings the one changing fewest bidders relative to
    ``reference`` is returned; remaining ties go to lower bidder ids in
    higher slots.
    """
    model = _model(instance, bids)
    ctr = instance.ctr

    def weight(i: int, j: int) -> Optional[Fraction]:
        return model.values[i] * ctr(j) if model.feasible(i, j) else None

    players = [i for i in instance.ids if i != excluded]
    assigned = max_weight_assignment(
        players,
        instance.k,
        weight,
        rank=bidder_ranks(instance),
        reference=None if reference is None else reference.slot_of_bidder,
    )
    return Matching(tuple(assigned.items()), matching_value(assigned, instance, model.values))


@dataclass(frozen=True)
class VcgResult:
    allocation: Matching
    opt_value: Fraction
    opt_minus: Mapping[int, Fraction]
    prices: Mapping[int, Fraction]
    ctrs: tuple[Fraction, ...]

    def price_per_click(self, bidder_id: int) -> Fraction:
        slot = self.allocation.slot_of(bidder_id)
        return self.prices[bidder_id] / self.ctrs[slot - 1]

    def to_outcome(self) -> Outcome:
        assignment = self.allocation.bidder_at_slot
        ppc = {j: self.prices[i] / self.ctrs[j - 1] for j, i in assignment.items()}
        totals = {j: self.prices[i] for j, i in assignment.items()}
        return Outcome(len(self.ctrs), assignment, ppc, (), totals)

    def to_dict(self) -> dict[str, Any]:
        return {
            "opt_value": str(self.opt_value),
            "allocation": [
                {
                    "slot": j,
                    "bidder": i,
                    "opt_minus_value": str(self.opt_minus[i]),
                    "vcg_price": str(self.prices[i]),
                    "ppc": str(self.price_per_click(i)),
                }
                for i, j in self.allocation.pairs
            ],
        }


def vcg_outcome(instance: AuctionInstance, bids: Optional[BidProfile] = None) -> VcgResult:
    """VCG allocation and total prices ``p_i = OPT_-i - OPT + c_j * value_i``.

    Reads true valuations when ``bids`` is None, otherwise declared bids and
    stated ranges.
    """
    model = _model(instance, bids)
    allocation = solve_max_matching(instance, bids)
    opt = allocation.value
    opt_minus: dict[int, Fraction] = {}
    prices: dict[int, Fraction] = {}
    for i, j in allocation.pairs:
        without = solve_max_matching(instance, bids, excluded=i, reference=allocation)
        opt_minus[i] = without.value
        prices[i] = without.value - opt + instance.ctr(j) * model.values[i]
    return VcgResult(
        allocation,
        opt,
        MappingProxyType(opt_minus),
        MappingProxyType(prices),
        instance.slots.ctrs,
    )


@dataclass(frozen=True)
class Link:
    bidder: int
    from_slot: Optional[int]  # None: bidder was unassigned in OPT
    to_slot: int

    @property
    def downward(self) -> bool:
        return self.from_slot is not None and self.to_slot > self.from_slot

    @property
    def upward(self) -> bool:
        # an entering bidder comes from below every real slot
        return self.from_slot is None or self.to_slot < self.from_slot


@dataclass(frozen=True)
class Chain:
    """Moves turning OPT into OPT_-i, ordered so the last link fills i's slot."""

    removed: int
    terminal_slot: int
    links: tuple[Link, ...]

    @property
    def entering(self) -> Optional[int]:
        if self.links and self.links[0].from_slot is None:
            return self.links[0].bidder
        return None

    def has_down_then_up(self) -> bool:
        return any(a.downward and b.upward for a, b in zip(self.links, self.links[1:]))

    def __len__(self) -> int:
        return len(self.links)


def chain_between(opt: Matching, opt_minus: Matching, removed: int) -> Chain:
    """Walk the alternating path from the removed bidder's slot.

    Raises ``ValueError`` when the two matchings differ anywhere off the path.
    """
    before = opt.slot_of_bidder
    after = opt_minus.slot_of_bidder
    occupant_after = opt_minus.bidder_at_slot
    if removed not in before:
        raise NotAssigned(f"bidder {removed} is unassigned in OPT")
    terminal = before[removed]
    reversed_links: list[Link] = []
    slot = terminal
    visited: set[int] = set()
    while slot in occupant_after:
        mover = occupant_after[slot]
        if mover in visited:
            raise ValueError("cycle in matching difference")
        visited.add(mover)
        origin = before.get(mover)
        reversed_links.append(Link(mover, origin, slot))
        if origin is None:
            break
        slot = origin
    links = tuple(reversed(reversed_links))
    moved = {link.bidder for link in links}
    for i, j in after.items():
        if i not in moved and before.get(i) != j:
            raise ValueError(f"bidder {i} changed slot off the chain")
    for i, j in before.items():
        if i != removed and i not in moved and after.get(i) != j:
            raise ValueError(f"bidder {i} dropped out off the chain")
    return Chain(removed, terminal, links)


def compute_chain(
    instance: AuctionInstance, removed: int, bids: Optional[BidProfile] = None
) -> Chain:
    opt = solve_max_matching(instance, bids)
    if opt.slot_of(removed) is None:
        raise NotAssigned(f"bidder {removed} is unassigned in OPT")
    opt_minus = solve_max_matching(instance, bids, excluded=removed, reference=opt)
    return chain_between(opt, opt_minus, removed)
