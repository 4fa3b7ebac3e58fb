"""Domain types and the utility model shared by every mechanism.

Every quantity is a :class:`fractions.Fraction`. Floats are rejected at the
boundary so that equality checks downstream can stay exact.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Optional, Union

Rational = Fraction
RationalLike = Union[int, str, Fraction]


class AuctionError(ValueError):
    """Base class for every error raised by this package."""


class InvalidInstance(AuctionError):
    pass


class NonDecreasingCtrs(InvalidInstance):
    pass


class CutoffOutOfRange(InvalidInstance):
    pass


class NegativeValue(InvalidInstance):
    pass


class DuplicateId(InvalidInstance):
    pass


class RangeDeclarationPresent(AuctionError):
    pass


class TiedBids(AuctionError):
    pass


class NotAssigned(AuctionError):
    pass


class NotEnvyFree(AuctionError):
    pass


class TooLarge(AuctionError):
    pass


def as_rational(value: RationalLike, name: str = "value") -> Fraction:
    """Coerce ``int``, ``Fraction`` or a ``"p/q"`` string to a Fraction."""
    if isinstance(value, bool):
        raise TypeError(f"{name}: booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            num, sep, den = text.partition("/")
            if sep:
                if int(den) <= 0:
                    raise ValueError
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except ValueError:
            raise ValueError(f"{name}: {value!r} is not an integer or p/q rational") from None
    raise TypeError(f"{name}: expected int, Fraction or 'p/q' string, got {type(value).__name__}")


@functools.total_ordering
class _NegativeInfinity:
    """The utility of a bidder shown outside her range.

    Only comparison is supported; it sits below every rational.
    """

    _instance: Optional["_NegativeInfinity"] = None

    def __new__(cls) -> "_NegativeInfinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other: object) -> bool:
        return other is self

    def __lt__(self, other: object) -> bool:
        if other is self:
            return False
        if isinstance(other, (int, Fraction)):
            return True
        return NotImplemented

    def __hash__(self) -> int:
        return hash("-inf")

    def __repr__(self) -> str:
        return "NEG_INF"

    def __str__(self) -> str:
        return "-inf"

    def __reduce__(self):
        return (_NegativeInfinity, ())


NEG_INF = _NegativeInfinity()
ExtendedRational = Union[Fraction, _NegativeInfinity]


@dataclass(frozen=True)
class Bidder:
    id: int
    valuation: Fraction
    cutoff: int
    range_start: int = 1
    weight: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "valuation", as_rational(self.valuation, "valuation"))
        object.__setattr__(self, "weight", as_rational(self.weight, "weight"))
        if self.valuation < 0:
            raise NegativeValue(f"bidder {self.id}: valuation {self.valuation} < 0")
        if self.weight <= 0:
            raise NegativeValue(f"bidder {self.id}: weight {self.weight} must be > 0")
        if not 1 <= self.range_start <= self.cutoff:
            raise CutoffOutOfRange(
                f"bidder {self.id}: need 1 <= range_start ({self.range_start}) "
                f"<= cutoff ({self.cutoff})"
            )

    def in_range(self, slot: int) -> bool:
        return self.range_start <= slot <= self.cutoff


@dataclass(frozen=True)
class SlotSchedule:
    ctrs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        ctrs = tuple(as_rational(c, "ctr") for c in self.ctrs)
        object.__setattr__(self, "ctrs", ctrs)
        if not ctrs:
            raise InvalidInstance("slot schedule needs at least one slot")
        for j, c in enumerate(ctrs, start=1):
            if c <= 0:
                raise NegativeValue(f"ctr of slot {j} is {c}; must be > 0")
        for j in range(len(ctrs) - 1):
            if ctrs[j] <= ctrs[j + 1]:
                raise NonDecreasingCtrs(
                    f"ctrs must strictly decrease: c_{j + 1}={ctrs[j]} <= c_{j + 2}={ctrs[j + 1]}"
                )

    @property
    def k(self) -> int:
        return len(self.ctrs)

    def ctr(self, slot: int) -> Fraction:
        """Click-through rate of 1-indexed ``slot``."""
        return self.ctrs[slot - 1]

    def __len__(self) -> int:
        return len(self.ctrs)


@dataclass(frozen=True)
class AuctionInstance:
    bidders: tuple[Bidder, ...]
    slots: SlotSchedule
    reserve: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bidders", tuple(self.bidders))
        object.__setattr__(self, "reserve", as_rational(self.reserve, "reserve"))
        if not isinstance(self.slots, SlotSchedule):
            object.__setattr__(self, "slots", SlotSchedule(tuple(self.slots)))
        if self.reserve < 0:
            raise NegativeValue(f"reserve {self.reserve} < 0")
        seen: set[int] = set()
        for b in self.bidders:
            if b.id in seen:
                raise DuplicateId(f"bidder id {b.id} appears twice")
            seen.add(b.id)
            if b.cutoff > self.k:
                raise CutoffOutOfRange(f"bidder {b.id}: cutoff {b.cutoff} > k={self.k}")

    @property
    def k(self) -> int:
        return self.slots.k

    @property
    def n(self) -> int:
        return len(self.bidders)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(b.id for b in self.bidders)

    def bidder(self, bidder_id: int) -> Bidder:
        for b in self.bidders:
            if b.id == bidder_id:
                return b
        raise KeyError(bidder_id)

    def ctr(self, slot: int) -> Fraction:
        return self.slots.ctr(slot)

    @property
    def is_prefix(self) -> bool:
        return all(b.range_start == 1 for b in self.bidders)


@dataclass(frozen=True)
class Declaration:
    """What one bidder tells the auctioneer."""

    bid: Fraction
    stated_cutoff: int
    stated_range_start: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "bid", as_rational(self.bid, "bid"))
        if self.bid < 0:
            raise NegativeValue(f"bid {self.bid} < 0")
        if not 1 <= self.stated_range_start <= self.stated_cutoff:
            raise CutoffOutOfRange(
                f"stated range [{self.stated_range_start}, {self.stated_cutoff}] is empty"
            )

    def in_range(self, slot: int) -> bool:
        return self.stated_range_start <= slot <= self.stated_cutoff


@dataclass(frozen=True)
class BidProfile:
    declarations: Mapping[int, Declaration]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "declarations", MappingProxyType(dict(sorted(self.declarations.items())))
        )

    @classmethod
    def truthful(cls, instance: AuctionInstance) -> "BidProfile":
        return cls(
            {
                b.id: Declaration(b.valuation, b.cutoff, b.range_start)
                for b in instance.bidders
            }
        )

    @classmethod
    def from_bids(
        cls,
        instance: AuctionInstance,
        bids: Mapping[int, RationalLike],
        cutoffs: Optional[Mapping[int, int]] = None,
    ) -> "BidProfile":
        """Declared bids with stated cutoffs defaulting to the true ones."""
        cutoffs = cutoffs or {}
        return cls(
            {
                b.id: Declaration(bids[b.id], cutoffs.get(b.id, b.cutoff), b.range_start)
                for b in instance.bidders
            }
        )

    def __getitem__(self, bidder_id: int) -> Declaration:
        return self.declarations[bidder_id]

    def bid(self, bidder_id: int) -> Fraction:
        return self.declarations[bidder_id].bid

    def replace(self, bidder_id: int, declaration: Declaration) -> "BidProfile":
        updated = dict(self.declarations)
        updated[bidder_id] = declaration
        return BidProfile(updated)

    def without(self, bidder_id: int) -> "BidProfile":
        return BidProfile({i: d for i, d in self.declarations.items() if i != bidder_id})

    @property
    def is_prefix(self) -> bool:
        return all(d.stated_range_start == 1 for d in self.declarations.values())

    def check_against(self, instance: AuctionInstance) -> None:
        if set(self.declarations) != set(instance.ids):
            raise InvalidInstance("bid profile must declare exactly the instance's bidders")
        for i, d in self.declarations.items():
            if d.stated_cutoff > instance.k:
                raise CutoffOutOfRange(
                    f"bidder {i}: stated cutoff {d.stated_cutoff} > k={instance.k}"
                )


@dataclass(frozen=True)
class Outcome:
    """Slot assignment and prices. Slots are 1-indexed.

    ``fillers`` lists interior slots that had no eligible bidder in a range
    auction and were padded with a filler ad.
    """

    k: int
    assignment: Mapping[int, int]
    ppc: Mapping[int, Fraction]
    fillers: tuple[int, ...] = ()
    total_price: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", MappingProxyType(dict(sorted(self.assignment.items()))))
        object.__setattr__(self, "ppc", MappingProxyType(dict(sorted(self.ppc.items()))))
        object.__setattr__(self, "fillers", tuple(sorted(self.fillers)))
        if set(self.assignment) != set(self.ppc):
            raise ValueError("every filled slot needs exactly one price")
        if len(set(self.assignment.values())) != len(self.assignment):
            raise ValueError("a bidder holds two slots")
        object.__setattr__(self, "total_price", MappingProxyType(dict(self.total_price)))

    @classmethod
    def build(
        cls,
        slots: SlotSchedule,
        assignment: Mapping[int, int],
        ppc: Mapping[int, Fraction],
        fillers: Iterable[int] = (),
    ) -> "Outcome":
        totals = {j: ppc[j] * slots.ctr(j) for j in assignment}
        return cls(slots.k, assignment, ppc, tuple(fillers), totals)

    def slot_of(self, bidder_id: int) -> Optional[int]:
        for j, i in self.assignment.items():
            if i == bidder_id:
                return j
        return None

    @property
    def filled(self) -> tuple[int, ...]:
        return tuple(self.assignment)

    @property
    def winners(self) -> tuple[int, ...]:
        return tuple(self.assignment.values())

    def allocation(self) -> tuple[Optional[int], ...]:
        """Bidder id per slot 1..k, ``None`` for empty slots."""
        return tuple(self.assignment.get(j) for j in range(1, self.k + 1))

    def value(self, values: Mapping[int, Fraction], slots: SlotSchedule) -> Fraction:
        return sum((values[i] * slots.ctr(j) for j, i in self.assignment.items()), Fraction(0))

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "slots": [
                {
                    "slot": j,
                    "bidder": self.assignment.get(j),
                    "filler": j in self.fillers,
                    "ppc": str(self.ppc[j]) if j in self.ppc else None,
                    "total_price": str(self.total_price[j]) if j in self.total_price else None,
                }
                for j in range(1, self.k + 1)
            ],
        }


def validate_instance(raw: Mapping[str, Any]) -> AuctionInstance:
    """Build an :class:`AuctionInstance` from parsed document fields.

    Raises the first violated invariant: ctrs are checked before bidders,
    bidders in document order.
    """
    slots = SlotSchedule(tuple(as_rational(c, "slots") for c in raw["slots"]))
    reserve = as_rational(raw.get("reserve", 0), "reserve")
    bidders = []
    for entry in raw["bidders"]:
        bidders.append(
            Bidder(
                id=int(entry["id"]),
                valuation=as_rational(entry["valuation"], "valuation"),
                cutoff=int(entry["cutoff"]),
                range_start=int(entry.get("range_start", 1)),
                weight=as_rational(entry.get("weight", 1), "weight"),
            )
        )
    return AuctionInstance(tuple(bidders), slots, reserve)


def utility(
    bidder: Bidder,
    slot: Optional[int],
    total_price: Fraction,
    slots: SlotSchedule,
) -> ExtendedRational:
    """True utility of ``bidder`` seated at ``slot`` paying ``total_price``.

    ``slot=None`` means unassigned (utility 0). A slot outside the bidder's
    true range is worth ``NEG_INF`` whatever the price.
    """
    if slot is None:
        return Fraction(0)
    if not bidder.in_range(slot):
        return NEG_INF
    return slots.ctr(slot) * bidder.valuation - total_price


def outcome_utility(instance: AuctionInstance, outcome: Outcome, bidder_id: int) -> ExtendedRational:
    slot = outcome.slot_of(bidder_id)
    price = outcome.total_price[slot] if slot is not None else Fraction(0)
    return utility(instance.bidder(bidder_id), slot, price, instance.slots)
