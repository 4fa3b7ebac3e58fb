"""JSON instance documents.

Rationals travel as strings (``"101"``, ``"2/101"``). Bidders may carry a
declared ``bid`` / ``stated_cutoff`` / ``stated_range_start``; an optional
``bid_matrix`` maps bidder id -> position -> bid for the general auction.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from .core import AuctionError, AuctionInstance, BidProfile, Declaration, as_rational, validate_instance
from .general_bids import BidMatrix

log = logging.getLogger(__name__)

TOP_KEYS = {"slots", "reserve", "bidders", "bid_matrix"}
BIDDER_KEYS = {
    "id",
    "valuation",
    "cutoff",
    "range_start",
    "weight",
    "bid",
    "stated_cutoff",
    "stated_range_start",
}


class DocumentError(AuctionError):
    """Malformed document; the message names the key and its line."""


@dataclass(frozen=True)
class InstanceDocument:
    instance: AuctionInstance
    bids: Optional[BidProfile] = None
    bid_matrix: Optional[BidMatrix] = None

    @property
    def declared(self) -> BidProfile:
        """Declared bids, truthful where the document gives none."""
        return self.bids if self.bids is not None else BidProfile.truthful(self.instance)


def _line_of(text: str, path: Sequence[Union[str, int]]) -> Optional[int]:
    """Best-effort line number of ``path`` (keys and list indices) in ``text``."""
    pos = 0
    for part in path:
        if isinstance(part, int):
            for _ in range(part + 1):
                nxt = text.find("{", pos)
                if nxt < 0:
                    return None
                pos = nxt + 1
        else:
            m = re.compile(r'"%s"\s*:' % re.escape(str(part))).search(text, pos)
            if m is None:
                return None
            pos = m.start() + 1
    return text.count("\n", 0, pos) + 1


def _fail(text: str, path: Sequence[Union[str, int]], message: str) -> DocumentError:
    key = "".join(f"[{p}]" if isinstance(p, int) else (f".{p}" if i else str(p)) for i, p in enumerate(path))
    line = _line_of(text, path)
    where = f" (line {line})" if line is not None else ""
    return DocumentError(f"{key}{where}: {message}")


def parse_document(text: str) -> InstanceDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise DocumentError("document must be a JSON object")
    for key in sorted(set(raw) - TOP_KEYS):
        log.warning("ignoring unknown key %r", key)
    for key in ("slots", "bidders"):
        if key not in raw:
            raise _fail(text, [], f"missing required key {key!r}")
    if not isinstance(raw["bidders"], list):
        raise _fail(text, ["bidders"], "must be a list")

    # validate field by field first so errors can point at a line
    for idx, entry in enumerate(raw["bidders"]):
        if not isinstance(entry, dict):
            raise _fail(text, ["bidders"], f"entry {idx} is not an object")
        for key in sorted(set(entry) - BIDDER_KEYS):
            log.warning("ignoring unknown key bidders[%d].%s", idx, key)
        for key in ("id", "valuation", "cutoff"):
            if key not in entry:
                raise _fail(text, ["bidders", idx], f"missing required key {key!r}")
        for key in ("valuation", "weight", "bid"):
            if key in entry:
                try:
                    as_rational(entry[key], key)
                except (TypeError, ValueError) as exc:
                    raise _fail(text, ["bidders", idx, key], str(exc)) from None
        for key in ("id", "cutoff", "range_start", "stated_cutoff", "stated_range_start"):
            if key in entry and (not isinstance(entry[key], int) or isinstance(entry[key], bool)):
                raise _fail(text, ["bidders", idx, key], f"{entry[key]!r} is not an integer")
    for idx, c in enumerate(raw["slots"]):
        try:
            as_rational(c, "slots")
        except (TypeError, ValueError) as exc:
            raise _fail(text, ["slots"], f"entry {idx}: {exc}") from None
    if "reserve" in raw:
        try:
            as_rational(raw["reserve"], "reserve")
        except (TypeError, ValueError) as exc:
            raise _fail(text, ["reserve"], str(exc)) from None

    try:
        instance = validate_instance(raw)
    except AuctionError as exc:
        raise DocumentError(f"{type(exc).__name__}: {exc}") from None

    bids = None
    declared_keys = ("bid", "stated_cutoff", "stated_range_start")
    if any(key in e for e in raw["bidders"] for key in declared_keys):
        decls = {}
        for idx, (e, b) in enumerate(zip(raw["bidders"], instance.bidders)):
            try:
                decls[b.id] = Declaration(
                    as_rational(e.get("bid", b.valuation)),
                    e.get("stated_cutoff", b.cutoff),
                    e.get("stated_range_start", b.range_start),
                )
            except AuctionError as exc:
                raise _fail(text, ["bidders", idx], str(exc)) from None
        bids = BidProfile(decls)
        try:
            bids.check_against(instance)
        except AuctionError as exc:
            raise DocumentError(f"{type(exc).__name__}: {exc}") from None

    matrix = None
    if "bid_matrix" in raw:
        try:
            matrix = BidMatrix(
                {int(i): {int(j): b for j, b in row.items()} for i, row in raw["bid_matrix"].items()}
            )
            matrix.check_slots(instance.slots)
        except (AuctionError, TypeError, ValueError, AttributeError) as exc:
            raise _fail(text, ["bid_matrix"], str(exc)) from None
    return InstanceDocument(instance, bids, matrix)


def load_document(path: Union[str, Path]) -> InstanceDocument:
    return parse_document(Path(path).read_text())


def document_dict(doc: InstanceDocument) -> dict[str, Any]:
    inst = doc.instance
    bidders = []
    for b in inst.bidders:
        entry: dict[str, Any] = {"id": b.id, "valuation": str(b.valuation), "cutoff": b.cutoff}
        if b.range_start != 1:
            entry["range_start"] = b.range_start
        if b.weight != 1:
            entry["weight"] = str(b.weight)
        if doc.bids is not None:
            d = doc.bids[b.id]
            entry["bid"] = str(d.bid)
            entry["stated_cutoff"] = d.stated_cutoff
            if d.stated_range_start != 1:
                entry["stated_range_start"] = d.stated_range_start
        bidders.append(entry)
    out: dict[str, Any] = {
        "slots": [str(c) for c in inst.slots.ctrs],
        "reserve": str(inst.reserve),
        "bidders": bidders,
    }
    if doc.bid_matrix is not None:
        out["bid_matrix"] = {
            str(i): {str(j): str(b) for j, b in row.items()} for i, row in doc.bid_matrix.entries.items()
        }
    return out


def dump_document(doc: InstanceDocument) -> str:
    return json.dumps(document_dict(doc), indent=2) + "\n"

