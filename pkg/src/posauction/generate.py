"""Seeded random instances for property suites."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .core import AuctionInstance, Bidder, BidProfile, Declaration, SlotSchedule
from .general_bids import BidMatrix


def random_ctrs(rng: random.Random, k: int, top: int = 1000) -> SlotSchedule:
    return SlotSchedule(tuple(Fraction(c) for c in sorted(rng.sample(range(1, top + 1), k), reverse=True)))


def random_rational(rng: random.Random, hi: int = 10**6, max_den: int = 50) -> Fraction:
    return Fraction(rng.randint(1, hi), rng.randint(1, max_den))


def random_prefix_instance(
    rng: random.Random,
    max_bidders: int = 8,
    max_slots: int = 5,
    reserve: Fraction = Fraction(0),
) -> AuctionInstance:
    n = rng.randint(1, max_bidders)
    k = rng.randint(1, max_slots)
    slots = random_ctrs(rng, k)
    bidders = tuple(Bidder(i, random_rational(rng), rng.randint(1, k)) for i in range(1, n + 1))
    return AuctionInstance(bidders, slots, reserve)


def random_generic_prefix_instance(
    rng: random.Random, max_bidders: int = 8, max_slots: int = 5
) -> AuctionInstance:
    """Prefix instance whose feasible matchings all have distinct values."""
    from .oracle import is_generic

    while True:
        inst = random_prefix_instance(rng, max_bidders, max_slots)
        if is_generic(inst):
            return inst


def random_range_instance(rng: random.Random, max_bidders: int = 7, max_slots: int = 5) -> AuctionInstance:
    n = rng.randint(1, max_bidders)
    k = rng.randint(1, max_slots)
    bidders = []
    for i in range(1, n + 1):
        lo = rng.randint(1, k)
        hi = rng.randint(lo, k)
        bidders.append(Bidder(i, random_rational(rng), hi, lo))
    return AuctionInstance(tuple(bidders), random_ctrs(rng, k))


def random_distinct_bids(
    rng: random.Random, instance: AuctionInstance, avoid: Optional[Fraction] = None
) -> BidProfile:
    """Pairwise distinct positive bids, also distinct from ``avoid``."""
    chosen: set[Fraction] = set()
    while len(chosen) < instance.n:
        b = Fraction(rng.randint(1, 10**4), rng.randint(1, 20))
        if b != avoid:
            chosen.add(b)
    values = rng.sample(sorted(chosen), instance.n)
    return BidProfile(
        {
            b.id: Declaration(v, rng.randint(1, instance.k))
            for b, v in zip(instance.bidders, values)
        }
    )


def random_min_pay_case(
    rng: random.Random, max_bidders: int = 8, max_slots: int = 5
) -> tuple[AuctionInstance, BidProfile]:
    inst = random_prefix_instance(rng, max_bidders, max_slots)
    if rng.random() < 0.5:
        inst = AuctionInstance(inst.bidders, inst.slots, Fraction(rng.randint(1, 200), 20))
    return inst, random_distinct_bids(rng, inst, avoid=inst.reserve)


def random_bid_matrix(
    rng: random.Random, max_bidders: int = 7, max_slots: int = 5
) -> tuple[BidMatrix, SlotSchedule]:
    n = rng.randint(1, max_bidders)
    k = rng.randint(1, max_slots)
    entries = {}
    for i in range(1, n + 1):
        row = {j: Fraction(rng.randint(0, 1000), rng.randint(1, 10)) for j in range(1, k + 1) if rng.random() < 0.6}
        if not row:
            row = {rng.randint(1, k): Fraction(rng.randint(0, 1000), rng.randint(1, 10))}
        entries[i] = row
    return BidMatrix(entries), random_ctrs(rng, k)


def tiny_instance(rng: random.Random) -> AuctionInstance:
    """n <= 5, k <= 3, small integer values: sized for the envy-free grid search."""
    n = rng.randint(1, 5)
    k = rng.randint(1, 3)
    ctrs = SlotSchedule(tuple(Fraction(c) for c in (3, 2, 1)[3 - k:]))
    bidders = tuple(Bidder(i, Fraction(rng.randint(1, 3)), rng.randint(1, k)) for i in range(1, n + 1))
    return AuctionInstance(bidders, ctrs)
