"""Rank-based position auctions and the minimum-pay checker.

Ties between equal bids always go to the lower bidder id. A bid below the
reserve does not compete, and the reserve is the per-click floor charged
whenever a winner has no runner-up.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Literal, Optional, Union

from .core import (
    AuctionInstance,
    BidProfile,
    Declaration,
    Outcome,
    RangeDeclarationPresent,
    TiedBids,
)

Mechanism = Callable[[AuctionInstance, BidProfile], Outcome]
Variant = Literal["before", "after"]


def _rank_key(bids: BidProfile, weights: Optional[dict[int, Fraction]] = None):
    if weights is None:
        return lambda i: (-bids.bid(i), i)
    return lambda i: (-weights[i] * bids.bid(i), i)


def _eligible(instance: AuctionInstance, bids: BidProfile) -> list[int]:
    return [i for i in instance.ids if bids.bid(i) >= instance.reserve]


def run_gsp(instance: AuctionInstance, bids: BidProfile) -> Outcome:
    """Generalized second price, ranking by ``weight * bid``.

    Position constraints are ignored. The bidder at rank r pays
    ``w_{r+1} b_{r+1} / w_r`` per click, or the reserve when nobody ranks below.
    """
    weights = {b.id: b.weight for b in instance.bidders}
    ranking = sorted(_eligible(instance, bids), key=_rank_key(bids, weights))
    assignment, ppc = {}, {}
    for r, i in enumerate(ranking[: instance.k]):
        slot = r + 1
        if r + 1 < len(ranking):
            nxt = ranking[r + 1]
            price = weights[nxt] * bids.bid(nxt) / weights[i]
        else:
            price = instance.reserve
        assignment[slot] = i
        ppc[slot] = max(price, instance.reserve)
    return Outcome.build(instance.slots, assignment, ppc)


def _require_prefix(bids: BidProfile) -> None:
    if not bids.is_prefix:
        raise RangeDeclarationPresent(
            "declared top cutoffs present; use run_range_topdown for range declarations"
        )


def _per_slot_second_price(
    instance: AuctionInstance, bids: BidProfile, stop_on_empty: bool
) -> tuple[dict[int, int], dict[int, Fraction]]:
    pool = _eligible(instance, bids)
    key = _rank_key(bids)
    assignment: dict[int, int] = {}
    ppc: dict[int, Fraction] = {}
    for slot in range(1, instance.k + 1):
        contenders = sorted((i for i in pool if bids[i].in_range(slot)), key=key)
        if not contenders:
            if stop_on_empty:
                break
            continue
        winner = contenders[0]
        runner_up = bids.bid(contenders[1]) if len(contenders) > 1 else instance.reserve
        assignment[slot] = winner
        ppc[slot] = max(runner_up, instance.reserve)
        pool.remove(winner)
    return assignment, ppc


def run_topdown(instance: AuctionInstance, bids: BidProfile) -> Outcome:
    """Top-down prefix auction: one second-price auction per slot, top first.

    Only bidders whose stated cutoff reaches the slot take part; the winner
    leaves the pool. With prefix ranges an empty slot means every lower slot
    is empty too.
    """
    _require_prefix(bids)
    assignment, ppc = _per_slot_second_price(instance, bids, stop_on_empty=True)
    return Outcome.build(instance.slots, assignment, ppc)


def run_range_topdown(instance: AuctionInstance, bids: BidProfile) -> Outcome:
    """Top-down auction over arbitrary stated ranges.

    A slot nobody may take is skipped rather than ending the auction; skipped
    slots above a filled one are reported as fillers.
    """
    assignment, ppc = _per_slot_second_price(instance, bids, stop_on_empty=False)
    last = max(assignment, default=0)
    fillers = [j for j in range(1, last) if j not in assignment]
    return Outcome.build(instance.slots, assignment, ppc, fillers)


def run_topdown_flawed(instance: AuctionInstance, bids: BidProfile, variant: Variant) -> Outcome:
    """Rank-then-remove allocation with one of the two naive pricing rules.

    Bidders are ranked by bid; walking down the list, anyone sitting below
    her stated cutoff is removed and the rest shift up. ``"before"`` prices
    each winner by the next bid in the original ranking, ``"after"`` by the
    next bid among survivors. The last in either list pays the reserve.
    """
    if variant not in ("before", "after"):
        raise ValueError(f"unknown variant {variant!r}")
    _require_prefix(bids)
    original = sorted(_eligible(instance, bids), key=_rank_key(bids))
    survivors: list[int] = []
    for i in original:
        if len(survivors) + 1 <= bids[i].stated_cutoff:
            survivors.append(i)
    price_list = original if variant == "before" else survivors
    position = {i: r for r, i in enumerate(price_list)}
    assignment, ppc = {}, {}
    for r, i in enumerate(survivors[: instance.k]):
        nxt = position[i] + 1
        price = bids.bid(price_list[nxt]) if nxt < len(price_list) else instance.reserve
        assignment[r + 1] = i
        ppc[r + 1] = max(price, instance.reserve)
    return Outcome.build(instance.slots, assignment, ppc)


def flawed_before(instance: AuctionInstance, bids: BidProfile) -> Outcome:
    return run_topdown_flawed(instance, bids, "before")


def flawed_after(instance: AuctionInstance, bids: BidProfile) -> Outcome:
    return run_topdown_flawed(instance, bids, "after")


MECHANISMS: dict[str, Mechanism] = {
    "gsp": run_gsp,
    "topdown": run_topdown,
    "flawed-before": flawed_before,
    "flawed-after": flawed_after,
    "range-topdown": run_range_topdown,
}


def resolve_mechanism(mechanism: Union[str, Mechanism]) -> Mechanism:
    if callable(mechanism):
        return mechanism
    try:
        return MECHANISMS[mechanism]
    except KeyError:
        raise ValueError(
            f"unknown mechanism {mechanism!r}; choose from {sorted(MECHANISMS)}"
        ) from None


# -- invariant checkers -----------------------------------------------------


def ordering_holds(instance: AuctionInstance, bids: BidProfile, outcome: Outcome) -> bool:
    """Winners' weighted bids never increase down the page."""
    weighted = [
        instance.bidder(i).weight * bids.bid(i) for _, i in sorted(outcome.assignment.items())
    ]
    return all(a >= b for a, b in zip(weighted, weighted[1:]))


def prices_respect_bids(instance: AuctionInstance, bids: BidProfile, outcome: Outcome) -> bool:
    return all(
        instance.reserve <= outcome.ppc[j] <= bids.bid(i) for j, i in outcome.assignment.items()
    )


@dataclass(frozen=True)
class MinPayEntry:
    bidder: int
    slot: int
    charged_ppc: Fraction
    retaining_bid: Fraction

    @property
    def violation(self) -> Optional[str]:
        if self.charged_ppc > self.retaining_bid:
            return "overcharged"
        if self.charged_ppc < self.retaining_bid:
            return "undercharged"
        return None


@dataclass(frozen=True)
class MinPayReport:
    entries: tuple[MinPayEntry, ...]

    @property
    def violations(self) -> tuple[MinPayEntry, ...]:
        return tuple(e for e in self.entries if e.violation)

    @property
    def ok(self) -> bool:
        return not self.violations

    def entry(self, bidder_id: int) -> MinPayEntry:
        for e in self.entries:
            if e.bidder == bidder_id:
                return e
        raise KeyError(bidder_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "entries": [
                {
                    "bidder": e.bidder,
                    "slot": e.slot,
                    "charged_ppc": str(e.charged_ppc),
                    "retaining_bid": str(e.retaining_bid),
                    "violation": e.violation,
                }
                for e in self.entries
            ],
        }


def _breakpoints(instance: AuctionInstance, bids: BidProfile, bidder_id: int) -> list[Fraction]:
    w = instance.bidder(bidder_id).weight
    points = {Fraction(0), instance.reserve}
    for b in instance.bidders:
        if b.id != bidder_id:
            points.add(b.weight * bids.bid(b.id) / w)
    return sorted(points)


def _half_step(points: list[Fraction]) -> Fraction:
    gaps = [b - a for a, b in zip(points, points[1:])]
    return min(gaps) / 2 if gaps else Fraction(1)


def check_min_pay(
    instance: AuctionInstance,
    bids: BidProfile,
    mechanism: Union[str, Mechanism] = "topdown",
) -> MinPayReport:
    """Compare each winner's price with the least bid that keeps her slot.

    With the other bids fixed, the outcome only changes where the bidder's
    (weighted) bid crosses another bid or the reserve, so probing every
    breakpoint and one point inside each gap finds the infimum exactly.
    """
    run = resolve_mechanism(mechanism)
    declared = sorted(bids.bid(i) for i in instance.ids)
    if len(set(declared)) != len(declared) or instance.reserve in declared:
        raise TiedBids("minimum-pay check needs pairwise distinct bids, all distinct from the reserve")
    outcome = run(instance, bids)
    entries = []
    for slot, i in outcome.assignment.items():
        points = _breakpoints(instance, bids, i)
        half = _half_step(points)
        probes: list[tuple[Fraction, Fraction]] = []  # (probe bid, infimum it witnesses)
        for p in points:
            probes.append((p, p))
            probes.append((p + half, p))
        original = bids[i]
        retaining: Optional[Fraction] = None
        for probe, witness in probes:
            trial = bids.replace(
                i, Declaration(probe, original.stated_cutoff, original.stated_range_start)
            )
            if run(instance, trial).assignment.get(slot) == i:
                retaining = witness
                break
        assert retaining is not None, "the declared bid itself keeps the slot"
        entries.append(MinPayEntry(i, slot, outcome.ppc[slot], retaining))
    return MinPayReport(tuple(entries))
