from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from posauction.core import (
    NEG_INF,
    AuctionInstance,
    Bidder,
    BidProfile,
    CutoffOutOfRange,
    Declaration,
    DuplicateId,
    NegativeValue,
    NonDecreasingCtrs,
    Outcome,
    SlotSchedule,
    as_rational,
    utility,
    validate_instance,
)

from .strategies import instances, positive_rationals, rationals


def raw(**overrides):
    doc = {
        "slots": ["5", "4", "3", "2", "1"],
        "reserve": "0",
        "bidders": [
            {"id": 1, "valuation": "3", "cutoff": 5},
            {"id": 2, "valuation": "2", "cutoff": 2},
        ],
    }
    doc.update(overrides)
    return doc


def test_valid_instance():
    inst = validate_instance(raw())
    assert inst.k == 5 and inst.n == 2
    assert inst.bidder(2).cutoff == 2
    assert inst.reserve == 0


def test_non_decreasing_ctrs():
    with pytest.raises(NonDecreasingCtrs):
        validate_instance(raw(slots=["3", "3", "2"]))


def test_cutoff_beyond_k():
    with pytest.raises(CutoffOutOfRange):
        validate_instance(raw(bidders=[{"id": 1, "valuation": "1", "cutoff": 6}]))


@pytest.mark.parametrize(
    "bidders, error",
    [
        ([{"id": 1, "valuation": "-1", "cutoff": 1}], NegativeValue),
        ([{"id": 1, "valuation": "1", "cutoff": 0}], CutoffOutOfRange),
        ([{"id": 1, "valuation": "1", "cutoff": 2, "range_start": 3}], CutoffOutOfRange),
        ([{"id": 1, "valuation": "1", "cutoff": 1, "weight": "0"}], NegativeValue),
        ([{"id": 1, "valuation": "1", "cutoff": 1}, {"id": 1, "valuation": "2", "cutoff": 1}], DuplicateId),
    ],
)
def test_rejected_bidders(bidders, error):
    with pytest.raises(error):
        validate_instance(raw(bidders=bidders))


def test_ctrs_checked_before_bidders():
    doc = raw(slots=["1", "2"], bidders=[{"id": 1, "valuation": "1", "cutoff": 9}])
    with pytest.raises(NonDecreasingCtrs):
        validate_instance(doc)


def test_as_rational():
    assert as_rational("2/101") == Fraction(2, 101)
    assert as_rational(" 7 ") == 7
    with pytest.raises(TypeError):
        as_rational(0.5)
    with pytest.raises(ValueError):
        as_rational("1/0")
    with pytest.raises(ValueError):
        as_rational("abc")


def test_utility_examples():
    slots = SlotSchedule((101, 100))
    a = Bidder(1, 2, 2)
    assert utility(a, 2, Fraction(0), slots) == 200
    five = SlotSchedule((5, 4, 3))
    assert utility(Bidder(2, 5, 2), 3, Fraction(1000), five) is NEG_INF
    assert utility(Bidder(2, 5, 2), None, Fraction(0), five) == 0


def test_utility_above_range_start_is_neg_inf():
    slots = SlotSchedule((3, 2, 1))
    assert utility(Bidder(1, 1, 3, 2), 1, Fraction(0), slots) is NEG_INF


def test_neg_inf_orders_below_everything():
    assert NEG_INF < Fraction(-10**9)
    assert NEG_INF < -5
    assert Fraction(0) > NEG_INF
    assert max([NEG_INF, Fraction(-3)]) == -3
    assert NEG_INF == NEG_INF and not NEG_INF < NEG_INF
    assert NEG_INF <= NEG_INF


@given(positive_rationals, rationals, rationals)
def test_utility_strictly_decreasing_in_price(v, p, q):
    slots = SlotSchedule((3, 2, 1))
    b = Bidder(1, v, 3)
    if p < q:
        assert utility(b, 2, p, slots) > utility(b, 2, q, slots)


@given(positive_rationals, st.integers(1, 4))
def test_utility_strictly_decreasing_in_slot(v, cutoff):
    slots = SlotSchedule((10, 7, 3, 1))
    b = Bidder(1, v, cutoff)
    us = [utility(b, j, Fraction(0), slots) for j in range(1, cutoff + 1)]
    assert all(x > y for x, y in zip(us, us[1:]))


MUTATIONS = [
    ("cutoff", lambda inst: inst.k + 1, CutoffOutOfRange),
    ("cutoff", lambda inst: 0, CutoffOutOfRange),
    ("valuation", lambda inst: "-1", NegativeValue),
    ("id", None, DuplicateId),
]


def as_raw(inst: AuctionInstance) -> dict:
    return {
        "slots": [str(c) for c in inst.slots.ctrs],
        "reserve": str(inst.reserve),
        "bidders": [
            {
                "id": b.id,
                "valuation": str(b.valuation),
                "cutoff": b.cutoff,
                "range_start": b.range_start,
                "weight": str(b.weight),
            }
            for b in inst.bidders
        ],
    }


@given(instances(prefix=False), st.data())
def test_validation_accepts_iff_invariants_hold(inst, data):
    doc = as_raw(inst)
    assert validate_instance(doc) == inst
    field, value, error = data.draw(st.sampled_from(MUTATIONS))
    idx = data.draw(st.integers(0, inst.n - 1))
    bad = as_raw(inst)
    if field == "id":
        bad["bidders"].append(dict(bad["bidders"][idx]))
    else:
        bad["bidders"][idx][field] = value(inst)
        if field == "cutoff":
            bad["bidders"][idx]["range_start"] = 1
    with pytest.raises(error):
        validate_instance(bad)


@given(schedules_k=st.integers(2, 5), data=st.data())
def test_swapping_two_ctrs_is_rejected(schedules_k, data):
    ctrs = list(range(schedules_k, 0, -1))
    j = data.draw(st.integers(0, schedules_k - 2))
    ctrs[j], ctrs[j + 1] = ctrs[j + 1], ctrs[j]
    with pytest.raises(NonDecreasingCtrs):
        SlotSchedule(tuple(ctrs))


def test_declarations_and_profile():
    inst = AuctionInstance((Bidder(1, 3, 2), Bidder(2, 1, 1)), SlotSchedule((2, 1)))
    prof = BidProfile.truthful(inst)
    assert prof.bid(1) == 3 and prof[1].stated_cutoff == 2
    moved = prof.replace(2, Declaration(5, 2))
    assert moved.bid(2) == 5 and prof.bid(2) == 1
    with pytest.raises(CutoffOutOfRange):
        Declaration(1, 2, 3)
    with pytest.raises(NegativeValue):
        Declaration(-1, 1)


def test_outcome_totals_are_exact():
    slots = SlotSchedule((101, 100))
    out = Outcome.build(slots, {1: 2, 2: 1}, {1: Fraction(2, 101), 2: Fraction(0)})
    assert out.total_price == {1: 2, 2: 0}
    assert out.slot_of(1) == 2 and out.slot_of(3) is None
    assert out.allocation() == (2, 1)
    with pytest.raises(ValueError):
        Outcome.build(slots, {1: 2, 2: 2}, {1: Fraction(0), 2: Fraction(0)})
