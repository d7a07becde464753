"""Dense exact linear algebra over ``Fraction``: elimination and a small simplex.

Matrices are lists (or tuples) of rows. Sizes here are desk scale (a few
hundred unknowns at most), so nothing is clever about storage.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = Sequence[Sequence[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)


def zeros(rows: int, cols: int) -> list[list[Fraction]]:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> list[list[Fraction]]:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> list[list[Fraction]]:
    if a and len(a[0]) != len(b):
        raise ValueError(f"shape mismatch: {len(a)}x{len(a[0])} @ {len(b)}x{len(b[0]) if b else 0}")
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [ZERO] * cols
        for k, v in enumerate(row):
            if v:
                bk = b[k]
                for j in range(cols):
                    if bk[j]:
                        acc[j] += v * bk[j]
        out.append(acc)
    return out


def matsub(a: Matrix, b: Matrix) -> list[list[Fraction]]:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def is_zero(m: Matrix) -> bool:
    return all(v == 0 for row in m for v in row)


def rref(m: Matrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = [list(map(Fraction, row)) for row in m]
    if not a:
        return a, []
    nrows, ncols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def solve_affine(e: Matrix, b: Sequence[Fraction]):
    """Solution set of ``e @ x = b`` as ``(particular, basis)``, or ``None``.

    The particular solution sets every free variable to zero; ``basis`` spans
    the null space of ``e``.
    """
    ncols = len(e[0])
    aug = [list(row) + [Fraction(bi)] for row, bi in zip(e, b)]
    r, pivots = rref(aug)
    if ncols in pivots:
        return None
    particular = [ZERO] * ncols
    for i, c in enumerate(pivots):
        particular[c] = r[i][ncols]
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for i, c in enumerate(pivots):
            v[c] = -r[i][f]
        basis.append(v)
    return particular, basis


def solve_square(a: Matrix, b: Sequence[Fraction]) -> list[Fraction] | None:
    """Unique solution of a square system, or ``None`` when singular."""
    n = len(a)
    res = solve_affine(a, b)
    if res is None or res[1]:
        return None
    assert len(res[0]) == n
    return res[0]


class LPResult:
    __slots__ = ("status", "x", "value")

    def __init__(self, status: str, x=None, value=None):
        self.status = status
        self.x = x
        self.value = value

    def __repr__(self) -> str:
        return f"LPResult({self.status!r}, value={self.value})"


def _pivot(t: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    inv = 1 / t[r][c]
    t[r] = [v * inv for v in t[r]]
    for i in range(len(t)):
        if i != r and t[i][c] != 0:
            f = t[i][c]
            t[i] = [x - f * y for x, y in zip(t[i], t[r])]
    basis[r] = c


def _run_simplex(t, basis, cost_row: int, allowed: int) -> str:
    """Bland's rule on tableau ``t``; the objective row is ``t[cost_row]``."""
    m = cost_row
    while True:
        obj = t[cost_row]
        enter = next((j for j in range(allowed) if obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i in range(m):
            if t[i][enter] > 0:
                ratio = t[i][-1] / t[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(t, basis, best[1], enter)


def lp_minimize(e: Matrix, b: Sequence[Fraction], c: Sequence[Fraction]) -> LPResult:
    """Exact two-phase simplex for ``min c·x`` s.t. ``e x = b``, ``x >= 0``."""
    n = len(c)
    aug = [list(row) + [Fraction(bi)] for row, bi in zip(e, b)]
    r, pivots = rref(aug)
    if n in pivots:
        return LPResult("infeasible")
    rows = [row for row, p in zip(r, pivots)]
    for row in rows:
        if row[-1] < 0:
            row[:] = [-v for v in row]
    m = len(rows)
    # tableau columns: n originals, m artificials, rhs
    t = []
    for i, row in enumerate(rows):
        art = [ONE if k == i else ZERO for k in range(m)]
        t.append(row[:n] + art + [row[-1]])
    basis = [n + i for i in range(m)]
    phase1 = [ZERO] * (n + m + 1)
    for row in t:
        for j in range(n):
            phase1[j] -= row[j]
        phase1[-1] -= row[-1]
    t.append(phase1)
    _run_simplex(t, basis, m, n + m)
    if t[m][-1] != 0:
        return LPResult("infeasible")
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if t[i][j] != 0), None)
            if j is not None:
                _pivot(t, basis, i, j)
    t.pop()
    obj = [Fraction(v) for v in c] + [ZERO] * m + [ZERO]
    for i in range(m):
        if obj[basis[i]] != 0:
            f = obj[basis[i]]
            obj = [x - f * y for x, y in zip(obj, t[i])]
    t.append(obj)
    status = _run_simplex(t, basis, m, n)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [ZERO] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = t[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), ZERO)
    return LPResult("optimal", x, value)
