"""Per-position bids: max-matching allocation with price-lowering pricing."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Optional

from .assignment import max_weight_assignment
from .core import AuctionInstance, InvalidInstance, Outcome, SlotSchedule, as_rational


@dataclass(frozen=True)
class BidMatrix:
    """``entries[i][j]``: bidder i's per-click bid for slot j (absent = won't take it)."""

    entries: Mapping[int, Mapping[int, Fraction]]

    def __post_init__(self) -> None:
        cleaned = {}
        for i, row in sorted(self.entries.items()):
            if not row:
                raise InvalidInstance(f"bidder {i} has no position bids")
            parsed = {}
            for j, b in sorted(row.items()):
                b = as_rational(b, f"bid_matrix[{i}][{j}]")
                if b < 0:
                    raise InvalidInstance(f"bid_matrix[{i}][{j}] = {b} < 0")
                parsed[int(j)] = b
            cleaned[int(i)] = MappingProxyType(parsed)
        object.__setattr__(self, "entries", MappingProxyType(cleaned))

    @property
    def bidders(self) -> tuple[int, ...]:
        return tuple(self.entries)

    def bid(self, bidder_id: int, slot: int) -> Optional[Fraction]:
        return self.entries[bidder_id].get(slot)

    def check_slots(self, slots: SlotSchedule) -> None:
        for i, row in self.entries.items():
            for j in row:
                if not 1 <= j <= slots.k:
                    raise InvalidInstance(f"bid_matrix[{i}] names position {j} outside 1..{slots.k}")

    def only(self, bidder_id: int, slot: int, bid: Fraction) -> "BidMatrix":
        """Copy where ``bidder_id`` keeps a single edge ``slot`` at ``bid``."""
        entries = {i: dict(row) for i, row in self.entries.items()}
        entries[bidder_id] = {slot: bid}
        return BidMatrix(entries)

    @classmethod
    def from_prefix(cls, instance: AuctionInstance, bids: Optional[Mapping[int, Fraction]] = None) -> "BidMatrix":
        """Encode a range instance: a flat bid on every slot in range."""
        values = bids or {b.id: b.valuation for b in instance.bidders}
        return cls(
            {
                b.id: {j: values[b.id] for j in range(b.range_start, b.cutoff + 1)}
                for b in instance.bidders
            }
        )


def _ranks(matrix: BidMatrix) -> dict[int, int]:
    return {i: r for r, i in enumerate(sorted(matrix.bidders))}


def max_matching(
    matrix: BidMatrix,
    slots: SlotSchedule,
    excluded: Optional[int] = None,
    forbidden_slot: Optional[int] = None,
) -> tuple[dict[int, int], Fraction]:
    """Maximum of ``sum b_ij * c_j``; returns ``({bidder: slot}, value)``."""

    def weight(i: int, j: int) -> Optional[Fraction]:
        if j == forbidden_slot:
            return None
        b = matrix.bid(i, j)
        return None if b is None else b * slots.ctr(j)

    players = [i for i in matrix.bidders if i != excluded]
    assigned = max_weight_assignment(players, slots.k, weight, rank=_ranks(matrix))
    value = sum((matrix.bid(i, j) * slots.ctr(j) for i, j in assigned.items()), Fraction(0))
    return assigned, value


def _best_with_edge(matrix: BidMatrix, slots: SlotSchedule, bidder_id: int, slot: int) -> Fraction:
    """Value of the best matching forced to contain ``(bidder_id, slot)``."""
    _, rest = max_matching(matrix, slots, excluded=bidder_id, forbidden_slot=slot)
    return matrix.bid(bidder_id, slot) * slots.ctr(slot) + rest


def run_general_auction(matrix: BidMatrix, slots: SlotSchedule) -> Outcome:
    """Allocate by maximum matching; price each winner at her critical bid.

    For winner (i, j) with i's other edges deleted, the matching keeps i at j
    exactly while ``bid * c_j + R >= M_-i``, where R is the best value of the
    others with slot j taken. The per-click price is the bid where this
    binds, floored at 0, and is re-verified by solving again at that bid.
    """
    matrix.check_slots(slots)
    assigned, _ = max_matching(matrix, slots)
    assignment, ppc = {}, {}
    for i, j in assigned.items():
        _, m_minus = max_matching(matrix, slots, excluded=i)
        _, rest = max_matching(matrix, slots, excluded=i, forbidden_slot=j)
        price = max((m_minus - rest) / slots.ctr(j), Fraction(0))
        _verify_critical_bid(matrix, slots, i, j, price, m_minus)
        assignment[j] = i
        ppc[j] = price
    return Outcome.build(slots, assignment, ppc)


def _verify_critical_bid(
    matrix: BidMatrix, slots: SlotSchedule, i: int, j: int, price: Fraction, m_minus: Fraction
) -> None:
    lowered = matrix.only(i, j, price)
    _, best = max_matching(lowered, slots)
    if _best_with_edge(lowered, slots, i, j) != best:
        raise AssertionError(f"bidder {i} loses slot {j} at its critical bid {price}")
    if price > 0:
        below = matrix.only(i, j, price / 2)
        _, best_below = max_matching(below, slots)
        if _best_with_edge(below, slots, i, j) >= best_below or best_below != m_minus:
            raise AssertionError(f"bidder {i} keeps slot {j} below its critical bid {price}")


def vcg_price_formula(matrix: BidMatrix, slots: SlotSchedule) -> dict[int, Fraction]:
    """Total VCG price ``M_-i - (M - b_ij * c_j)`` per winner."""
    matrix.check_slots(slots)
    assigned, m = max_matching(matrix, slots)
    prices = {}
    for i, j in assigned.items():
        _, m_minus = max_matching(matrix, slots, excluded=i)
        prices[i] = m_minus - (m - matrix.bid(i, j) * slots.ctr(j))
    return prices

