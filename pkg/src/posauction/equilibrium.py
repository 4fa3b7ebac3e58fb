"""Equilibrium bids for the top-down auction and the checks around them.

The constructed profile has each OPT bidder bid the VCG per-click price of
the slot above her own, which makes the top-down auction reproduce the VCG
allocation and prices. Envy and Nash checkers evaluate any outcome or
profile against true valuations.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Mapping, Optional

from .core import (
    NEG_INF,
    AuctionInstance,
    BidProfile,
    Declaration,
    ExtendedRational,
    NotEnvyFree,
    Outcome,
    RangeDeclarationPresent,
    outcome_utility,
    utility,
)
from .mechanisms import run_topdown
from .vcg import VcgResult, solve_max_matching, vcg_outcome


@dataclass(frozen=True)
class EquilibriumBids:
    profile: BidProfile
    slot_of: Mapping[int, int]  # OPT slot of every assigned bidder
    alpha: Optional[int]
    vcg: VcgResult
    degenerate: bool  # every OPT price is zero, so the top bid is arbitrary

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "degenerate": self.degenerate,
            "bids": [
                {
                    "bidder": i,
                    "opt_slot": self.slot_of.get(i),
                    "bid": str(d.bid),
                    "stated_cutoff": d.stated_cutoff,
                }
                for i, d in self.profile.declarations.items()
            ],
        }


def construct_equilibrium_bids(instance: AuctionInstance) -> EquilibriumBids:
    """Bids under which the top-down auction reproduces the VCG outcome.

    The occupant of OPT slot s >= 2 bids ``p_{s-1} / c_{s-1}``; the top
    occupant bids twice the next bid down (1 if that is 0). If some bidder is
    left out of OPT, the lowest-id one (alpha) bids ``p_m / c_m`` for the last
    filled slot m with stated cutoff m, so that she sets the last price
    without winning an empty slot. Everyone else bids 0 truthfully capped.
    """
    if not instance.is_prefix:
        raise RangeDeclarationPresent("equilibrium construction needs prefix ranges")
    if instance.reserve != 0:
        raise ValueError("equilibrium construction assumes reserve 0")
    vcg = vcg_outcome(instance)
    occupant = vcg.allocation.bidder_at_slot
    slot_of = vcg.allocation.slot_of_bidder
    m = len(occupant)
    ctr = instance.ctr

    def per_click(slot: int) -> Fraction:
        return vcg.prices[occupant[slot]] / ctr(slot)

    bids: dict[int, Fraction] = {}
    cutoffs = {b.id: b.cutoff for b in instance.bidders}
    for s in range(2, m + 1):
        bids[occupant[s]] = per_click(s - 1)
    unassigned = sorted(i for i in instance.ids if i not in slot_of)
    alpha = unassigned[0] if unassigned and m else None
    if alpha is not None:
        bids[alpha] = per_click(m)
        cutoffs[alpha] = m
    for i in unassigned:
        bids.setdefault(i, Fraction(0))
    if m:
        below = bids[occupant[2]] if m >= 2 else bids.get(alpha, Fraction(0))
        bids[occupant[1]] = 2 * below if below > 0 else Fraction(1)
    profile = BidProfile({i: Declaration(bids[i], cutoffs[i]) for i in instance.ids})
    degenerate = all(p == 0 for p in vcg.prices.values())
    return EquilibriumBids(profile, MappingProxyType(dict(slot_of)), alpha, vcg, degenerate)


# -- envy ---------------------------------------------------------------------


@dataclass(frozen=True)
class Envy:
    envier: int
    target_slot: int
    current_utility: ExtendedRational
    target_utility: Fraction


@dataclass(frozen=True)
class EnvyReport:
    violations: tuple[Envy, ...]

    @property
    def envy_free(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "envy_free": self.envy_free,
            "violations": [
                {
                    "envier": v.envier,
                    "target_slot": v.target_slot,
                    "current_utility": str(v.current_utility),
                    "target_utility": str(v.target_utility),
                }
                for v in self.violations
            ],
        }


def check_envy_free(
    instance: AuctionInstance,
    outcome: Outcome,
    empty_slot_ppc: Optional[Fraction] = None,
) -> EnvyReport:
    """Find bidders who would rather take another slot at its current price.

    Only slots inside the bidder's true range count. Empty slots are skipped
    unless ``empty_slot_ppc`` gives the per-click price at which they may be
    taken.
    """
    violations = []
    for b in instance.bidders:
        current = outcome_utility(instance, outcome, b.id)
        own = outcome.slot_of(b.id)
        for j in range(b.range_start, b.cutoff + 1):
            if j == own:
                continue
            if j in outcome.assignment:
                price = outcome.total_price[j]
            elif empty_slot_ppc is not None:
                price = empty_slot_ppc * instance.ctr(j)
            else:
                continue
            target = utility(b, j, price, instance.slots)
            if target > current:
                violations.append(Envy(b.id, j, current, target))
    return EnvyReport(tuple(violations))


# -- Nash -----------------------------------------------------------------------


@dataclass(frozen=True)
class Deviation:
    bidder: int
    baseline: ExtendedRational
    best: ExtendedRational
    bid: Optional[Fraction]  # None: withdraw
    stated_cutoff: Optional[int]

    @property
    def improves(self) -> bool:
        return self.best > self.baseline

    @property
    def gain(self) -> Optional[Fraction]:
        """Exact gain, or None when either side is -inf."""
        if self.best is NEG_INF or self.baseline is NEG_INF:
            return None
        return self.best - self.baseline


@dataclass(frozen=True)
class NashReport:
    deviations: tuple[Deviation, ...]

    @property
    def equilibrium(self) -> bool:
        return not any(d.improves for d in self.deviations)

    def best_for(self, bidder_id: int) -> Deviation:
        for d in self.deviations:
            if d.bidder == bidder_id:
                return d
        raise KeyError(bidder_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "equilibrium": self.equilibrium,
            "bidders": [
                {
                    "bidder": d.bidder,
                    "baseline_utility": str(d.baseline),
                    "best_utility": str(d.best),
                    "gain": None if d.gain is None else str(d.gain),
                    "best_bid": None if d.bid is None else str(d.bid),
                    "best_stated_cutoff": d.stated_cutoff,
                }
                for d in self.deviations
            ],
        }


def deviation_grid(instance: AuctionInstance, bids: BidProfile, bidder_id: int) -> list[Fraction]:
    """Bids that cover every distinct outcome for one deviating bidder.

    Each other bid and the reserve is a breakpoint; the grid holds 0, every
    breakpoint, and a point just above each one (strictly inside the gap to
    the next).
    """
    points = sorted(
        {Fraction(0), instance.reserve} | {bids.bid(i) for i in instance.ids if i != bidder_id}
    )
    gaps = [b - a for a, b in zip(points, points[1:])]
    half = min(gaps) / 2 if gaps else Fraction(1)
    grid = set(points)
    grid.update(p + half for p in points)
    return sorted(grid)


def deviation_utility(
    instance: AuctionInstance,
    bids: BidProfile,
    bidder_id: int,
    bid: Optional[Fraction],
    stated_cutoff: int,
) -> ExtendedRational:
    if bid is None:
        return Fraction(0)
    trial = bids.replace(bidder_id, Declaration(bid, stated_cutoff))
    return outcome_utility(instance, run_topdown(instance, trial), bidder_id)


def check_nash(instance: AuctionInstance, bids: BidProfile) -> NashReport:
    """Best unilateral deviation per bidder under the top-down auction.

    Deviations range over the breakpoint grid times every stated cutoff,
    plus withdrawing. Utilities are true ones, so a deviation that lands a
    bidder outside her real range scores -inf.
    """
    base = run_topdown(instance, bids)
    deviations = []
    for i in instance.ids:
        baseline = outcome_utility(instance, base, i)
        best: ExtendedRational = Fraction(0)
        best_bid: Optional[Fraction] = None
        best_cut: Optional[int] = None
        for bid in deviation_grid(instance, bids, i):
            for cut in range(1, instance.k + 1):
                u = deviation_utility(instance, bids, i, bid, cut)
                if u > best:
                    best, best_bid, best_cut = u, bid, cut
        deviations.append(Deviation(i, baseline, best, best_bid, best_cut))
    return NashReport(tuple(deviations))


# -- bidder optimality --------------------------------------------------------


def vcg_price_in_slot(instance: AuctionInstance, bidder_id: int, slot: int) -> Fraction:
    """VCG total price of a bidder placed in ``slot`` of an optimal allocation."""
    opt = solve_max_matching(instance).value
    opt_minus = solve_max_matching(instance, excluded=bidder_id).value
    return opt_minus - opt + instance.ctr(slot) * instance.bidder(bidder_id).valuation


def bidder_optimality_gap(
    instance: AuctionInstance,
    outcome: Outcome,
    empty_slot_ppc: Optional[Fraction] = None,
) -> dict[int, Fraction]:
    """``p^E_x - p^VCG_x`` for every bidder placed by an envy-free outcome.

    The VCG price is taken for the slot the bidder holds in ``outcome``, so
    the gap equals her utility shortfall against VCG even when several
    optimal allocations exist.
    """
    if not check_envy_free(instance, outcome, empty_slot_ppc).envy_free:
        raise NotEnvyFree("outcome is not envy-free")
    return {
        i: outcome.total_price[j] - vcg_price_in_slot(instance, i, j)
        for j, i in outcome.assignment.items()
    }
