import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from posauction import oracle
from posauction.core import AuctionInstance, Bidder, NotAssigned, SlotSchedule
from posauction.generate import (
    random_generic_prefix_instance,
    random_prefix_instance,
    random_range_instance,
)
from posauction.vcg import Chain, Link, Matching, compute_chain, solve_max_matching, vcg_outcome

from .conftest import A, B, C
from .strategies import instances


def test_matching_divergence(divergence):
    m = solve_max_matching(divergence.instance)
    assert m.bidder_at_slot == {1: B, 2: A}
    assert m.value == 301


def test_matching_ranges(ranges):
    m = solve_max_matching(ranges.instance)
    assert m.bidder_at_slot == {1: A, 2: B, 3: C}
    assert m.value == 596


def test_zero_value_bidder_takes_best_slot():
    inst = AuctionInstance((Bidder(1, 0, 2),), SlotSchedule((2, 1)))
    m = solve_max_matching(inst)
    assert m.pairs == ((1, 1),) and m.value == 0


def test_matching_rejects_bad_pairs():
    with pytest.raises(ValueError):
        Matching(((1, 1), (2, 1)), Fraction(0))


def test_vcg_prices_ranges(ranges):
    result = vcg_outcome(ranges.instance)
    assert result.prices == {A: 2, B: 1, C: 0}
    assert result.opt_minus[A] == 298


def test_vcg_prices_divergence(divergence):
    result = vcg_outcome(divergence.instance)
    assert result.prices == {B: 2, A: 0}
    assert result.opt_minus == {B: 202, A: 101}
    assert result.price_per_click(B) == Fraction(2, 101)


def test_vcg_single_bidder():
    inst = AuctionInstance((Bidder(1, 7, 2),), SlotSchedule((5, 3)))
    assert vcg_outcome(inst).prices == {1: 0}


@pytest.mark.parametrize("name", ["divergence", "ranges", "example1", "example2"])
def test_vcg_prices_match_brute_force(name, request):
    inst = request.getfixturevalue(name).instance
    assert vcg_outcome(inst).prices == oracle.brute_force_vcg_prices(inst)


# -- chains ----------------------------------------------------------------------


def test_chain_ranges_remove_a(ranges):
    chain = compute_chain(ranges.instance, A)
    assert chain == Chain(A, 1, (Link(C, 3, 1),))
    assert not chain.has_down_then_up()


def test_chain_divergence_remove_b(divergence):
    assert compute_chain(divergence.instance, B).links == (Link(A, 2, 1),)


def test_chain_empty_when_last_bidder_removed(divergence):
    chain = compute_chain(divergence.instance, A)
    assert chain.links == () and chain.terminal_slot == 2


def test_chain_with_entering_bidder():
    inst = AuctionInstance((Bidder(1, 5, 1), Bidder(2, 3, 1)), SlotSchedule((1,)))
    chain = compute_chain(inst, 1)
    assert chain.entering == 2
    assert chain.links == (Link(2, None, 1),)
    assert chain.links[0].upward


def test_chain_of_unassigned_bidder():
    inst = AuctionInstance((Bidder(1, 5, 1), Bidder(2, 3, 1)), SlotSchedule((1,)))
    with pytest.raises(NotAssigned):
        compute_chain(inst, 2)


def test_link_directions():
    assert Link(1, 1, 3).downward and not Link(1, 1, 3).upward
    assert Link(1, 3, 1).upward


def _check_chain(inst, chain):
    opt = solve_max_matching(inst)
    for a, b in zip(chain.links, chain.links[1:]):
        assert a.to_slot == b.from_slot
    if chain.links:
        assert chain.links[-1].to_slot == opt.slot_of(chain.removed)
    for link in chain.links:
        assert inst.bidder(link.bidder).in_range(link.to_slot)


def test_chains_are_well_formed_and_minimal():
    rng = random.Random(3)
    for _ in range(150):
        inst = random_range_instance(rng) if rng.random() < 0.5 else random_prefix_instance(rng, 7)
        opt = solve_max_matching(inst)
        for i, _ in opt.pairs:
            chain = compute_chain(inst, i)
            _check_chain(inst, chain)
            assert not chain.has_down_then_up()
            # no OPT_-i matching moves fewer bidders
            brute = oracle.brute_force_matching(inst, excluded=i, reference=opt)
            moved = sum(1 for j, _ in brute.pairs if brute.slot_of(j) != opt.slot_of(j))
            assert len(chain) == moved


# -- solver vs oracle --------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(inst=instances(max_bidders=6, max_slots=4, prefix=False))
def test_solver_matches_brute_force(inst):
    solver = solve_max_matching(inst)
    brute = oracle.brute_force_matching(inst)
    assert solver.value == brute.value
    assert solver.bidder_at_slot == brute.bidder_at_slot
    for i in inst.ids:
        assert solve_max_matching(inst, excluded=i).value <= solver.value


def test_prefix_optimum_is_contiguous_and_prices_bounded():
    rng = random.Random(8)
    for _ in range(150):
        inst = random_prefix_instance(rng)
        result = vcg_outcome(inst)
        slots = sorted(result.allocation.bidder_at_slot)
        assert slots == list(range(1, len(slots) + 1))
        for i, j in result.allocation.pairs:
            assert 0 <= result.prices[i] <= inst.ctr(j) * inst.bidder(i).valuation


def test_externality_bounds_and_monotone_prices_generic():
    rng = random.Random(21)
    for _ in range(100):
        inst = random_generic_prefix_instance(rng)
        result = vcg_outcome(inst)
        at = result.allocation.bidder_at_slot
        for x in at:
            for y in at:
                if x >= y:
                    continue
                bx, by = inst.bidder(at[x]), inst.bidder(at[y])
                mx, my = result.opt_minus[bx.id], result.opt_minus[by.id]
                if bx.in_range(y):
                    assert my >= mx + inst.ctr(y) * (bx.valuation - by.valuation)
                assert mx >= my + inst.ctr(x) * (by.valuation - bx.valuation)
                assert result.prices[bx.id] / inst.ctr(x) > result.prices[by.id] / inst.ctr(y)
