import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from posauction.core import (
    AuctionInstance,
    Bidder,
    BidProfile,
    Declaration,
    RangeDeclarationPresent,
    SlotSchedule,
    TiedBids,
)
from posauction.generate import random_distinct_bids, random_min_pay_case, random_prefix_instance
from posauction.mechanisms import (
    MECHANISMS,
    check_min_pay,
    ordering_holds,
    prices_respect_bids,
    resolve_mechanism,
    run_gsp,
    run_range_topdown,
    run_topdown,
    run_topdown_flawed,
)

from .conftest import A, B, C, D, E
from .strategies import instances

F = Fraction


def ppcs(outcome):
    return [outcome.ppc[j] for j in sorted(outcome.assignment)]


# -- GSP -------------------------------------------------------------------------


def test_gsp_ranks_by_bid_and_ignores_cutoffs(example1):
    out = run_gsp(example1.instance, example1.declared)
    assert out.allocation() == (A, B, C, D, E)
    assert ppcs(out) == [4, 3, 2, 1, F(1, 20)]


def test_gsp_weighted():
    inst = AuctionInstance(
        (Bidder(1, 3, 2, weight=F(2)), Bidder(2, 5, 2)), SlotSchedule((2, 1))
    )
    out = run_gsp(inst, BidProfile.truthful(inst))
    assert out.allocation() == (1, 2)
    assert ppcs(out) == [F(5, 2), 0]


def test_gsp_drops_bids_below_reserve():
    inst = AuctionInstance((Bidder(1, 3, 2), Bidder(2, F(1, 100), 2)), SlotSchedule((2, 1)), F(1, 20))
    out = run_gsp(inst, BidProfile.truthful(inst))
    assert out.allocation() == (1, None)
    assert ppcs(out) == [F(1, 20)]


# -- top-down and the flawed variants -----------------------------------------


def test_topdown_example1(example1):
    out = run_topdown(example1.instance, example1.declared)
    assert out.allocation() == (A, B, C, E, None)
    assert ppcs(out) == [4, 3, 1, F(1, 20)]


def test_topdown_example2(example2):
    out = run_topdown(example2.instance, example2.declared)
    assert out.allocation() == (A, B, D, None, None)
    assert ppcs(out) == [4, 3, F(1, 20)]


def test_flawed_after_example2(example2):
    out = run_topdown_flawed(example2.instance, example2.declared, "after")
    assert out.allocation() == (A, B, D, None, None)
    assert ppcs(out) == [4, 2, F(1, 20)]


def test_flawed_before_example1(example1):
    out = run_topdown_flawed(example1.instance, example1.declared, "before")
    assert out.allocation() == (A, B, C, E, None)
    assert ppcs(out) == [4, 3, 2, F(1, 20)]


def test_flawed_variant_name_checked(example1):
    with pytest.raises(ValueError):
        run_topdown_flawed(example1.instance, example1.declared, "during")


def test_example2_bidder_b_gains_by_shading(example2):
    inst, bids = example2.instance, example2.declared
    truthful = run_topdown(inst, bids)
    shaded = run_topdown(inst, bids.replace(B, Declaration(F(5, 2), 5)))
    assert shaded.slot_of(B) == 3
    u = lambda out: inst.ctr(out.slot_of(B)) * 4 - out.total_price[out.slot_of(B)]
    assert u(shaded) > u(truthful)


def test_topdown_rejects_range_declarations(ranges):
    with pytest.raises(RangeDeclarationPresent):
        run_topdown(ranges.instance, ranges.declared)
    with pytest.raises(RangeDeclarationPresent):
        run_topdown_flawed(ranges.instance, ranges.declared, "before")


def test_resolve_mechanism():
    assert resolve_mechanism("topdown") is run_topdown
    assert resolve_mechanism(run_gsp) is run_gsp
    with pytest.raises(ValueError):
        resolve_mechanism("english")


# -- range top-down -------------------------------------------------------------


def test_range_topdown_example(ranges):
    out = run_range_topdown(ranges.instance, ranges.declared)
    assert out.allocation() == (A, B, C)
    assert ppcs(out) == [1, 1, 0]
    assert out.fillers == ()


def test_range_topdown_leaves_filler_above_a_range():
    inst = AuctionInstance((Bidder(1, 3, 2, 2),), SlotSchedule((2, 1)))
    out = run_range_topdown(inst, BidProfile.truthful(inst))
    assert out.allocation() == (None, 1)
    assert out.fillers == (1,)
    assert out.ppc[2] == 0


def test_range_topdown_trailing_empty_slots_are_not_fillers():
    inst = AuctionInstance((Bidder(1, 3, 1),), SlotSchedule((3, 2, 1)))
    out = run_range_topdown(inst, BidProfile.truthful(inst))
    assert out.allocation() == (1, None, None)
    assert out.fillers == ()


def test_range_topdown_equals_topdown_on_prefix_instances():
    rng = random.Random(11)
    for _ in range(200):
        inst = random_prefix_instance(rng, reserve=F(rng.randint(0, 3), 7))
        bids = random_distinct_bids(rng, inst)
        assert run_range_topdown(inst, bids) == run_topdown(inst, bids)


# -- invariants --------------------------------------------------------------------


PREFIX_MECHANISMS = ["gsp", "topdown", "flawed-before", "flawed-after", "range-topdown"]


@pytest.mark.parametrize("name", PREFIX_MECHANISMS)
@settings(max_examples=60, deadline=None)
@given(inst=instances())
def test_invariants(name, inst):
    run = MECHANISMS[name]
    bids = BidProfile.truthful(inst)
    out = run(inst, bids)
    assert out == run(inst, bids)
    assert prices_respect_bids(inst, bids, out)
    if name != "gsp":
        assert all(out.slot_of(i) <= bids[i].stated_cutoff for i in out.winners)
    if name == "gsp" or all(b.weight == 1 for b in inst.bidders):
        assert ordering_holds(inst, bids, out)
    if name != "range-topdown":
        filled = sorted(out.assignment)
        assert filled == list(range(1, len(filled) + 1))


# -- minimum pay -----------------------------------------------------------------


def test_min_pay_flawed_before_overcharges_c(example1):
    report = check_min_pay(example1.instance, example1.declared, "flawed-before")
    entry = report.entry(C)
    assert entry.charged_ppc == 2 and entry.retaining_bid == 1
    assert entry.violation == "overcharged"
    assert [e.bidder for e in report.violations] == [C]


def test_min_pay_flawed_after_undercharges_b(example2):
    report = check_min_pay(example2.instance, example2.declared, "flawed-after")
    entry = report.entry(B)
    assert entry.charged_ppc == 2 and entry.retaining_bid == 3
    assert entry.violation == "undercharged"


@pytest.mark.parametrize("fixture", ["example1", "example2"])
def test_min_pay_topdown_clean_on_fixtures(fixture, request):
    doc = request.getfixturevalue(fixture)
    report = check_min_pay(doc.instance, doc.declared, "topdown")
    assert report.ok
    assert all(e.charged_ppc == e.retaining_bid for e in report.entries)


def test_min_pay_requires_distinct_bids():
    inst = AuctionInstance((Bidder(1, 2, 1), Bidder(2, 2, 1)), SlotSchedule((1,)))
    with pytest.raises(TiedBids):
        check_min_pay(inst, BidProfile.truthful(inst))
    inst = AuctionInstance((Bidder(1, 2, 1),), SlotSchedule((1,)), F(2))
    with pytest.raises(TiedBids):
        check_min_pay(inst, BidProfile.truthful(inst))


def test_min_pay_random_topdown():
    rng = random.Random(5)
    for _ in range(300):
        inst, bids = random_min_pay_case(rng)
        assert check_min_pay(inst, bids).ok
