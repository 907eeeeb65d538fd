"""Dense two-phase simplex over exact rationals with Bland's pivoting rule.

Only meant for the tiny programs of the separation module (a few dozen
rows), where exactness matters more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LPResult:
    status: str
    x: Optional[list[Fraction]] = None
    value: Optional[Fraction] = None


def _pivot(rows, obj, basis, r, c):
    prow = rows[r]
    piv = prow[c]
    prow[:] = [v / piv for v in prow]
    for i, row in enumerate(rows):
        if i != r and row[c] != 0:
            f = row[c]
            row[:] = [a - f * b for a, b in zip(row, prow)]
    if obj[c] != 0:
        f = obj[c]
        obj[:] = [a - f * b for a, b in zip(obj, prow)]
    basis[r] = c


def _run(rows, obj, basis, columns):
    """Maximise; ``obj`` holds the negated reduced costs with the value last."""
    while True:
        entering = next((j for j in columns if obj[j] < 0), None)
        if entering is None:
            return OPTIMAL
        best = None
        for i, row in enumerate(rows):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return UNBOUNDED
        _pivot(rows, obj, basis, best[1], entering)


def maximize(
    c: Sequence,
    A_ub: Sequence[Sequence],
    b_ub: Sequence,
    lower: Optional[Sequence] = None,
    upper: Optional[Sequence] = None,
) -> LPResult:
    """Maximise ``c.x`` subject to ``A_ub x <= b_ub`` and ``lower <= x <= upper``.

    Missing bounds default to ``x >= 0`` with no upper limit.  All inputs are
    converted to :class:`~fractions.Fraction`.
    """
    n = len(c)
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A_ub]
    b = [Fraction(v) for v in b_ub]
    lo = [Fraction(v) for v in lower] if lower is not None else [Fraction(0)] * n
    # shift x = y + lo so that y >= 0
    b = [bi - sum(a * l for a, l in zip(row, lo)) for row, bi in zip(A, b)]
    if upper is not None:
        for j, u in enumerate(upper):
            if u is None:
                continue
            row = [Fraction(0)] * n
            row[j] = Fraction(1)
            A.append(row)
            b.append(Fraction(u) - lo[j])
    m = len(A)
    art = n + m
    width = n + m + 1
    rows = []
    for i, (row, bi) in enumerate(zip(A, b)):
        full = row + [Fraction(0)] * m + [Fraction(-1), bi]
        full[n + i] = Fraction(1)
        rows.append(full)
    basis = [n + i for i in range(m)]
    columns = list(range(width))

    if m and min(b) < 0:
        obj = [Fraction(0)] * (width + 1)
        obj[art] = Fraction(1)
        r = min(range(m), key=lambda i: (b[i], i))
        _pivot(rows, obj, basis, r, art)
        _run(rows, obj, basis, columns)
        if obj[-1] < 0:
            return LPResult(INFEASIBLE)
        if art in basis:
            r = basis.index(art)
            c_in = next((j for j in range(n + m) if rows[r][j] != 0), None)
            if c_in is not None:
                _pivot(rows, obj, basis, r, c_in)
    for row in rows:
        row[art] = Fraction(0)
    columns = [j for j in range(n + m)]

    obj = [-v for v in c] + [Fraction(0)] * m + [Fraction(0), Fraction(0)]
    for i, bv in enumerate(basis):
        if bv != art and obj[bv] != 0:
            f = obj[bv]
            obj[:] = [a - f * r for a, r in zip(obj, rows[i])]
    status = _run(rows, obj, basis, columns)
    if status != OPTIMAL:
        return LPResult(status)
    y = [Fraction(0)] * (n + m)
    for i, bv in enumerate(basis):
        if bv < n + m:
            y[bv] = rows[i][-1]
    x = [y[j] + lo[j] for j in range(n)]
    value = sum(cj * xj for cj, xj in zip(c, x))
    return LPResult(OPTIMAL, x, value)
