"""Exact maximum-weight bipartite matching with deterministic tie-breaking.

The Hungarian method only needs addition, subtraction and comparison, so it
runs unchanged over vectors ordered lexicographically. Each edge carries a
3-vector:

1. the economic value ``value_i * c_j``,
2. a reassignment score that rewards keeping a reference matching,
3. a positional code making the winner among remaining ties unique.

Maximizing the vector sum therefore optimizes value first, then the number of
bidders that keep their reference slot, then prefers lower bidder ranks in
higher slots. Missing edges are simply absent; every row also gets zero-weight
"stay out" columns, so partial matchings come for free.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence


class Lex(tuple):
    """Tuple with componentwise +/- and lexicographic comparison."""

    __slots__ = ()

    def __add__(self, other: "Lex") -> "Lex":  # type: ignore[override]
        return Lex(a + b for a, b in zip(self, other))

    def __sub__(self, other: "Lex") -> "Lex":
        return Lex(a - b for a, b in zip(self, other))

    def __neg__(self) -> "Lex":
        return Lex(-a for a in self)


def _hungarian_min(cost: Sequence[Sequence[Optional[Lex]]], zero: Lex) -> list[int]:
    """Min-cost perfect assignment of rows into columns (rows <= cols).

    ``cost[r][c] is None`` marks a forbidden edge. Returns the column of each
    row. Potentials-based O(n^2 m) variant; ``None`` stands for +infinity.
    """
    n = len(cost)
    m = len(cost[0]) if n else 0
    u = [zero] * (n + 1)
    v = [zero] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv: list[Optional[Lex]] = [None] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            delta: Optional[Lex] = None
            j1 = -1
            for j in range(1, m + 1):
                if used[j]:
                    continue
                c = row[j - 1]
                if c is not None:
                    cur = c - u[i0] - v[j]
                    if minv[j] is None or cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                mj = minv[j]
                if mj is not None and (delta is None or mj < delta):
                    delta = mj
                    j1 = j
            if delta is None:
                raise RuntimeError("no feasible augmenting path")
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] = u[p[j]] + delta
                    v[j] = v[j] - delta
                elif minv[j] is not None:
                    minv[j] = minv[j] - delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of = [0] * n
    for j in range(1, m + 1):
        if p[j]:
            col_of[p[j] - 1] = j - 1
    return col_of


def tie_code(rank: int, slot: int, n_total: int, k: int) -> int:
    """Positional code of putting the bidder of ``rank`` into ``slot``.

    Digits in base ``n_total + 1``, most significant digit for slot 1; the
    digit is ``n_total - rank`` so lower ranks score higher and an empty slot
    (digit 0) scores lowest.
    """
    return (n_total - rank) * (n_total + 1) ** (k - slot)


def max_weight_assignment(
    bidders: Sequence[int],
    k: int,
    weight: Callable[[int, int], Optional[Fraction]],
    *,
    rank: Mapping[int, int],
    reference: Optional[Mapping[int, int]] = None,
) -> dict[int, int]:
    """Maximum-weight matching of ``bidders`` into slots ``1..k``.

    ``weight(i, j)`` returns the edge value or ``None`` when bidder ``i`` may
    not take slot ``j``. ``rank`` orders every bidder of the underlying
    instance (not only those passed in) for the positional tie-break.
    ``reference`` maps bidder -> slot; when given, among maximum-value
    matchings the one changing the fewest bidders' slots wins.

    Returns ``{bidder: slot}``.
    """
    bidders = list(bidders)
    if not bidders or k == 0:
        return {}
    n_total = len(rank)
    zero = Lex((Fraction(0), 0, 0))
    cost: list[list[Optional[Lex]]] = []
    for i in bidders:
        row: list[Optional[Lex]] = []
        for j in range(1, k + 1):
            w = weight(i, j)
            if w is None:
                row.append(None)
                continue
            if reference is None:
                keep = 0
            else:
                keep = (1 if reference.get(i) == j else 0) - (0 if i in reference else 1)
            row.append(-Lex((w, keep, tie_code(rank[i], j, n_total, k))))
        row.extend([zero] * len(bidders))
        cost.append(row)
    cols = _hungarian_min(cost, zero)
    return {i: c + 1 for i, c in zip(bidders, cols) if c < k}
