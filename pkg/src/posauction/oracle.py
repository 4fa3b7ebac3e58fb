"""Brute-force ground truth for small instances.

Everything here enumerates; nothing is clever. The only shared machinery
with the code under test is the mechanism being probed (for deviation
searches) and the domain types.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .core import (
    AuctionInstance,
    BidProfile,
    Declaration,
    ExtendedRational,
    Outcome,
    SlotSchedule,
    TooLarge,
    outcome_utility,
)
from .general_bids import BidMatrix
from .mechanisms import Mechanism, run_range_topdown, run_topdown
from .vcg import Matching

MAX_BIDDERS = 8
MAX_SLOTS = 6
MAX_GRID = 200_000


def _assignments(
    players: Sequence[int], k: int, feasible: Callable[[int, int], bool]
) -> Iterator[dict[int, int]]:
    """Every injective partial map slot -> bidder respecting ``feasible``."""
    current: dict[int, int] = {}
    used: set[int] = set()

    def rec(slot: int) -> Iterator[dict[int, int]]:
        if slot > k:
            yield dict(current)
            return
        yield from rec(slot + 1)
        for i in players:
            if i not in used and feasible(i, slot):
                used.add(i)
                current[slot] = i
                yield from rec(slot + 1)
                del current[slot]
                used.discard(i)

    yield from rec(1)


def _values_and_ranges(instance: AuctionInstance, bids: Optional[BidProfile]):
    if bids is None:
        values = {b.id: b.valuation for b in instance.bidders}
        ranges = {b.id: (b.range_start, b.cutoff) for b in instance.bidders}
    else:
        values = {i: d.bid for i, d in bids.declarations.items()}
        ranges = {i: (d.stated_range_start, d.stated_cutoff) for i, d in bids.declarations.items()}
    return values, ranges


def _check_size(n: int, k: int) -> None:
    if n > MAX_BIDDERS or k > MAX_SLOTS:
        raise TooLarge(f"brute force limited to n <= {MAX_BIDDERS}, k <= {MAX_SLOTS}")


def all_matchings(
    instance: AuctionInstance,
    bids: Optional[BidProfile] = None,
    excluded: Optional[int] = None,
) -> Iterator[tuple[dict[int, int], Fraction]]:
    """Yield ``(slot -> bidder, value)`` for every feasible matching."""
    _check_size(instance.n, instance.k)
    values, ranges = _values_and_ranges(instance, bids)
    players = [i for i in instance.ids if i != excluded]
    for a in _assignments(players, instance.k, lambda i, j: ranges[i][0] <= j <= ranges[i][1]):
        yield a, sum((values[i] * instance.ctr(j) for j, i in a.items()), Fraction(0))


def brute_force_matching(
    instance: AuctionInstance,
    bids: Optional[BidProfile] = None,
    excluded: Optional[int] = None,
    reference: Optional[Matching] = None,
) -> Matching:
    """Best matching by exhaustive search, same tie rule as the solver.

    Key: value, then fewest bidders off their ``reference`` slot, then the
    slot-by-slot sequence of occupants preferring lower ids and filled slots.
    """
    ids = sorted(instance.ids)
    n_total = len(ids)
    rank = {i: r for r, i in enumerate(ids)}
    ref = reference.slot_of_bidder if reference is not None else None

    def key(a: dict[int, int], value: Fraction):
        if ref is None:
            moved = 0
        else:
            slot_of = {i: j for j, i in a.items()}
            moved = sum(1 for i in set(slot_of) | set(ref) if slot_of.get(i) != ref.get(i))
        order = tuple(n_total - rank[a[j]] if j in a else 0 for j in range(1, instance.k + 1))
        return (value, -moved, order)

    best = max(all_matchings(instance, bids, excluded), key=lambda av: key(*av))
    a, value = best
    return Matching(tuple((i, j) for j, i in a.items()), value)


def is_generic(instance: AuctionInstance, bids: Optional[BidProfile] = None) -> bool:
    """True when every feasible matching has a distinct value."""
    seen: set[Fraction] = set()
    for _, value in all_matchings(instance, bids):
        if value in seen:
            return False
        seen.add(value)
    return True


def brute_force_vcg_prices(instance: AuctionInstance) -> dict[int, Fraction]:
    """VCG total prices on valuations, all values by enumeration."""
    best = brute_force_matching(instance)
    prices = {}
    for i, j in best.pairs:
        minus = max(v for _, v in all_matchings(instance, excluded=i))
        prices[i] = minus - best.value + instance.ctr(j) * instance.bidder(i).valuation
    return prices


# -- general position bids ----------------------------------------------------


def brute_force_matrix_value(
    matrix: BidMatrix,
    slots: SlotSchedule,
    excluded: Optional[int] = None,
    forced: Optional[tuple[int, int]] = None,
) -> Fraction:
    """Best ``sum b_ij c_j``; ``forced=(i, j)`` restricts to matchings holding that edge."""
    _check_size(len(matrix.bidders), slots.k)
    players = [i for i in matrix.bidders if i != excluded]
    best = None
    for a in _assignments(players, slots.k, lambda i, j: matrix.bid(i, j) is not None):
        if forced is not None and a.get(forced[1]) != forced[0]:
            continue
        value = sum((matrix.bid(i, j) * slots.ctr(j) for j, i in a.items()), Fraction(0))
        if best is None or value > best:
            best = value
    if best is None:
        raise ValueError("no matching holds the forced edge")
    return best


def lowered_bid_price(
    matrix: BidMatrix, slots: SlotSchedule, bidder: int, slot: int, step: Fraction
) -> Fraction:
    """Lowest bid on the ``step`` grid at which ``bidder`` still holds ``slot``.

    The bidder's other edges are deleted first. Holding is monotone in the
    bid, so the descent is done by bisection over grid multiples.
    """

    def holds(bid: Fraction) -> bool:
        lowered = matrix.only(bidder, slot, bid)
        return brute_force_matrix_value(lowered, slots, forced=(bidder, slot)) == brute_force_matrix_value(
            lowered, slots
        )

    hi = math.ceil(matrix.bid(bidder, slot) / step)
    lo = 0
    if holds(Fraction(0)):
        return Fraction(0)
    while hi - lo > 1:  # invariant: holds(hi * step) and not holds(lo * step)
        mid = (lo + hi) // 2
        if holds(mid * step):
            hi = mid
        else:
            lo = mid
    return hi * step


# -- envy-free outcomes ----------------------------------------------------------


def iter_envy_free_outcomes(
    instance: AuctionInstance,
    price_grid_resolution: Fraction,
    empty_slot_ppc: Optional[Fraction] = Fraction(0),
) -> Iterator[Outcome]:
    """Every range-respecting allocation with grid per-click prices that is
    envy-free and individually rational.

    Per-click prices run over multiples of the resolution in ``[0, max v]``;
    an empty slot may be taken at ``empty_slot_ppc`` (None: never envied).
    """
    if instance.n > 5 or instance.k > 3:
        raise TooLarge("envy-free grid search limited to n <= 5, k <= 3")
    res = Fraction(price_grid_resolution)
    top = max((b.valuation for b in instance.bidders), default=Fraction(0))
    grid = [res * t for t in range(int(top / res) + 1)]
    k = instance.k
    ctr = instance.ctr
    bidders = {b.id: b for b in instance.bidders}

    def envies(i: int, own_slot: Optional[int], own_total: Fraction, target: int, target_total: Fraction) -> bool:
        b = bidders[i]
        if not b.in_range(target):
            return False
        current = Fraction(0) if own_slot is None else ctr(own_slot) * b.valuation - own_total
        return ctr(target) * b.valuation - target_total > current

    for a in _assignments(list(bidders), k, lambda i, j: bidders[i].in_range(j)):
        filled = sorted(a)
        empty = [j for j in range(1, k + 1) if j not in a]
        unassigned = [i for i in bidders if i not in a.values()]
        if empty_slot_ppc is not None and any(
            envies(z, None, Fraction(0), t, empty_slot_ppc * ctr(t)) for z in unassigned for t in empty
        ):
            continue
        totals: dict[int, Fraction] = {}

        def rec(pos: int) -> Iterator[dict[int, Fraction]]:
            if pos == len(filled):
                yield dict(totals)
                return
            s = filled[pos]
            y = a[s]
            for q in grid:
                if q > bidders[y].valuation:
                    break
                t = q * ctr(s)
                bad = False
                if empty_slot_ppc is not None:
                    bad = any(envies(y, s, t, e, empty_slot_ppc * ctr(e)) for e in empty)
                if not bad:
                    for s2, t2 in totals.items():
                        if envies(y, s, t, s2, t2) or envies(a[s2], s2, t2, s, t):
                            bad = True
                            break
                if not bad:
                    bad = any(envies(z, None, Fraction(0), s, t) for z in unassigned)
                if bad:
                    continue
                totals[s] = t
                yield from rec(pos + 1)
                del totals[s]

        for tot in rec(0):
            yield Outcome(k, a, {j: tot[j] / ctr(j) for j in a}, (), tot)


def search_envy_free_outcomes(
    instance: AuctionInstance,
    price_grid_resolution: Fraction,
    empty_slot_ppc: Optional[Fraction] = Fraction(0),
) -> list[Outcome]:
    return list(iter_envy_free_outcomes(instance, price_grid_resolution, empty_slot_ppc))


# -- deviations ------------------------------------------------------------------


def rational_gcd(values: Sequence[Fraction]) -> Fraction:
    nonzero = [Fraction(v) for v in values if v != 0]
    if not nonzero:
        return Fraction(0)
    lcm_den = math.lcm(*(v.denominator for v in nonzero))
    g = math.gcd(*(v.numerator * (lcm_den // v.denominator) for v in nonzero))
    return Fraction(abs(g), lcm_den)


def exhaustive_deviation_check(
    instance: AuctionInstance,
    bids: BidProfile,
    bidder: int,
    mechanism: Mechanism = run_topdown,
) -> ExtendedRational:
    """Best true utility ``bidder`` can reach by any grid bid and stated cutoff.

    The grid step is half the rational gcd of the other bids and the reserve,
    so it lands on every breakpoint and strictly inside every gap. Withdrawing
    (utility 0) is always available.
    """
    others = [bids.bid(i) for i in instance.ids if i != bidder] + [instance.reserve]
    g = rational_gcd(others)
    step = g / 2 if g else Fraction(1, 2)
    top = max(others) + 2 * step
    count = int(top / step) + 1
    if count * instance.k > MAX_GRID:
        raise TooLarge(f"deviation grid has {count} bids")
    original = bids[bidder]
    best: ExtendedRational = Fraction(0)
    for t in range(count):
        for cut in range(1, instance.k + 1):
            trial = bids.replace(bidder, Declaration(step * t, cut, original.stated_range_start))
            u = outcome_utility(instance, mechanism(instance, trial), bidder)
            if u > best:
                best = u
    return best


def deviation_utilities(
    instance: AuctionInstance,
    bids: BidProfile,
    bidder: int,
    candidate_bids: Sequence[Fraction],
    mechanism: Mechanism = run_topdown,
) -> dict[Fraction, ExtendedRational]:
    """Utility at each candidate bid, stated cutoff unchanged."""
    d = bids[bidder]
    return {
        b: outcome_utility(
            instance,
            mechanism(instance, bids.replace(bidder, Declaration(b, d.stated_cutoff, d.stated_range_start))),
            bidder,
        )
        for b in candidate_bids
    }


# -- range auction vs VCG --------------------------------------------------------


def order_embedding_grid(anchors: Sequence[Fraction], n: int) -> list[Fraction]:
    """Anchors plus ``n`` evenly spaced points inside every gap and above the top.

    Any weak order of ``n`` bids relative to the anchors is realized on it.
    """
    pts = sorted(set(anchors))
    grid = set(pts)
    for a, b in zip(pts, pts[1:]):
        grid.update(a + (b - a) * t / (n + 1) for t in range(1, n + 1))
    top = pts[-1] if pts else Fraction(0)
    grid.update(top + t for t in range(1, n + 1))
    return sorted(grid)


def search_range_profiles(
    instance: AuctionInstance,
    target: Outcome,
    candidate_bids: Optional[Sequence[Fraction]] = None,
) -> tuple[int, list[tuple[BidProfile, Outcome]]]:
    """Bid profiles (true ranges) whose range top-down outcome equals ``target``.

    By default the candidates are 0, the reserve and every per-click price
    ``target.total_price[j] / c_l``, embedded with room for every ordering;
    any matching profile then has an order-equivalent copy on the grid.
    Returns ``(profiles searched, matches)``.
    """
    if candidate_bids is None:
        anchors = {Fraction(0), instance.reserve}
        for total in target.total_price.values():
            for c in instance.slots.ctrs:
                anchors.add(total / c)
        candidate_bids = order_embedding_grid(sorted(anchors), instance.n)
    ids = instance.ids
    searched = 0
    matches = []
    for combo in itertools.product(candidate_bids, repeat=len(ids)):
        searched += 1
        profile = BidProfile(
            {b.id: Declaration(bid, b.cutoff, b.range_start) for b, bid in zip(instance.bidders, combo)}
        )
        out = run_range_topdown(instance, profile)
        if dict(out.assignment) == dict(target.assignment) and dict(out.total_price) == dict(target.total_price):
            matches.append((profile, out))
    return searched, matches
