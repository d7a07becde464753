"""Exact rational polynomials, the special function families, and real-root tools.

Everything here works over :class:`fractions.Fraction`. Polynomials are dense
coefficient tuples indexed by degree. Real roots are handled with Sturm
sequences on square-free parts, so every decision is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Poly",
    "ValueVector",
    "HermiteMeasure",
    "Decision",
    "RealRoot",
    "X",
    "hermite",
    "krawtchouk",
    "phi",
    "phi_tilde",
    "gaussian_moment",
    "gaussian_integral",
    "sturm_sequence",
    "count_real_roots",
    "squarefree_decomposition",
    "isolate_real_roots",
    "nonneg_on_reals",
    "global_min",
    "exact_global_min",
    "simplest_rational",
]


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v)


class Poly:
    """Immutable univariate polynomial with rational coefficients.

    ``coeffs[i]`` is the coefficient of ``x**i``. The zero polynomial has an
    empty coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def const(cls, c) -> "Poly":
        return cls([c])

    @classmethod
    def monomial(cls, n: int, c=1) -> "Poly":
        return cls([0] * n + [c])

    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Poly(0)"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and c == 1:
                terms.append(mono)
            elif mono and c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}{'*' + mono if mono else ''}")
        return "Poly(" + " + ".join(terms).replace("+ -", "- ") + ")"

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __add__(self, other) -> "Poly":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Poly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly(c * a for a in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Poly":
        c = _frac(c)
        return Poly(a / c for a in self.coeffs)

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        """Horner evaluation; exact for rationals, float for floats."""
        if isinstance(x, float):
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = acc * x + float(c)
            return acc
        x = _frac(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def deriv(self) -> "Poly":
        return Poly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        quot = [Fraction(0)] * (dq + 1)
        lead = other.lead
        for k in range(dq, -1, -1):
            q = rem[k + len(other.coeffs) - 1] / lead
            quot[k] = q
            if q:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= q * b
        return Poly(quot), Poly(rem[: len(other.coeffs) - 1])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        return self / self.lead if self.coeffs else self

    def interval_eval(self, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
        """Enclosure of ``{p(x) : lo <= x <= hi}`` by interval Horner."""
        acc_lo = acc_hi = Fraction(0)
        for c in reversed(self.coeffs):
            prods = (acc_lo * lo, acc_lo * hi, acc_hi * lo, acc_hi * hi)
            acc_lo = min(prods) + c
            acc_hi = max(prods) + c
        return acc_lo, acc_hi


X = Poly([0, 1])


def _as_poly(v) -> Poly:
    return v if isinstance(v, Poly) else Poly.const(v)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero if both inputs are zero)."""
    while b:
        a, b = b, a % b
    return a.monic()


@dataclass(frozen=True)
class ValueVector:
    """Function on the integer states ``offset, offset+1, ...``."""

    offset: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("ValueVector must be nonempty")
        object.__setattr__(self, "values", tuple(_frac(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, state: int) -> Fraction:
        i = state - self.offset
        if not 0 <= i < len(self.values):
            raise IndexError(f"state {state} outside [{self.offset}, {self.last}]")
        return self.values[i]

    @property
    def last(self) -> int:
        return self.offset + len(self.values) - 1

    @property
    def states(self) -> range:
        return range(self.offset, self.offset + len(self.values))

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def scale(self, c) -> "ValueVector":
        c = _frac(c)
        return ValueVector(self.offset, tuple(c * v for v in self.values))

    def __add__(self, other: "ValueVector") -> "ValueVector":
        self._check(other)
        return ValueVector(self.offset, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "ValueVector") -> "ValueVector":
        self._check(other)
        return ValueVector(self.offset, tuple(a - b for a, b in zip(self.values, other.values)))

    def _check(self, other: "ValueVector") -> None:
        if self.offset != other.offset or len(self) != len(other):
            raise ValueError("state spaces differ")

    @classmethod
    def zeros(cls, offset: int, size: int) -> "ValueVector":
        return cls(offset, (Fraction(0),) * size)


# --------------------------------------------------------------------------
# special families


def hermite(n: int) -> Poly:
    """Monic Hermite polynomial ``h_n`` (probabilists' convention)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _hermite_table(n)[n]


_HERMITE_CACHE: list[Poly] = [Poly.const(1), X]


def _hermite_table(n: int) -> list[Poly]:
    while len(_HERMITE_CACHE) <= n:
        k = len(_HERMITE_CACHE) - 1
        _HERMITE_CACHE.append(X * _HERMITE_CACHE[k] - _HERMITE_CACHE[k - 1] * k)
    return _HERMITE_CACHE


def krawtchouk(N: int, n: int) -> ValueVector:
    """Values of ``K_{N,n}`` on ``[0, N]``.

    ``K_{N,n}(x)`` is ``n!`` times the coefficient of ``z**n`` in
    ``(1 + z/2)**x * (1 - z/2)**(N - x)``.
    """
    if N < 0 or n < 0 or n > N:
        raise ValueError(f"need 0 <= n <= N, got N={N}, n={n}")
    half = Fraction(1, 2)
    vals = []
    for x in range(N + 1):
        s = Fraction(0)
        for i in range(max(0, n - (N - x)), min(x, n) + 1):
            j = n - i
            s += math.comb(x, i) * math.comb(N - x, j) * (-1) ** j * half ** n
        vals.append(s * math.factorial(n))
    return ValueVector(0, tuple(vals))


def phi(n: int, length: int) -> ValueVector:
    """``y -> binom(y, n)`` on ``[0, length - 1]``."""
    if n < 0 or length < 1:
        raise ValueError("need n >= 0 and length >= 1")
    return ValueVector(0, tuple(Fraction(math.comb(y, n)) for y in range(length)))


def phi_tilde(n: int, N: int) -> ValueVector:
    """``y -> (-1)**y * binom(n - 1, -y)`` on ``[-N, 0]``; requires ``n >= 1``."""
    if n < 1:
        raise ValueError("phi_tilde is defined for n >= 1; use the constant 1 for n = 0")
    if N < 0:
        raise ValueError("N must be nonnegative")
    vals = tuple(Fraction((-1) ** (-y) * math.comb(n - 1, -y)) for y in range(-N, 1))
    return ValueVector(-N, vals)


# --------------------------------------------------------------------------
# Gaussian integration


def gaussian_moment(k: int) -> Fraction:
    """``E[Z**k]`` for standard normal ``Z``: ``(k-1)!!`` for even ``k``, else 0."""
    if k % 2:
        return Fraction(0)
    out = 1
    for j in range(k - 1, 0, -2):
        out *= j
    return Fraction(out)


def gaussian_integral(p: Poly) -> Fraction:
    """Exact ``∫ p dγ`` for the standard Gaussian ``γ``."""
    return sum((c * gaussian_moment(i) for i, c in enumerate(p.coeffs)), Fraction(0))


@dataclass(frozen=True)
class HermiteMeasure:
    """Measure ``p(x) γ(dx)`` with density ``p = Σ c_n h_n``.

    Coefficients may be exact rationals or floats (after semigroup evolution).
    Nonnegativity of the density is not assumed.
    """

    c: tuple

    def __post_init__(self):
        c = tuple(self.c)
        if not c or c[0] != 1:
            raise ValueError("total mass must be 1 (c_0 = 1)")
        object.__setattr__(self, "c", c)

    def density(self) -> Poly:
        """Density as an exact polynomial (floats are converted exactly)."""
        out = Poly()
        for n, cn in enumerate(self.c):
            if cn:
                out = out + hermite(n) * Fraction(cn)
        return out

    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.c)


# --------------------------------------------------------------------------
# real roots


def sturm_sequence(p: Poly) -> list[Poly]:
    if p.is_zero():
        raise ValueError("Sturm sequence of the zero polynomial")
    seq = [p, p.deriv()]
    while seq[-1]:
        seq.append(-(seq[-2] % seq[-1]))
    seq.pop()
    return seq


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _variations(signs: Iterable[int]) -> int:
    last = 0
    count = 0
    for s in signs:
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def _var_at(seq: Sequence[Poly], x) -> int:
    return _variations(_sign(q(x)) for q in seq)


def _var_inf(seq: Sequence[Poly], positive: bool) -> int:
    if positive:
        return _variations(_sign(q.lead) for q in seq)
    return _variations(_sign(q.lead) * (-1) ** q.degree for q in seq)


def count_real_roots(p: Poly, lo=None, hi=None) -> int:
    """Number of distinct real roots in ``(lo, hi]`` (``None`` means infinite)."""
    seq = sturm_sequence(p)
    v_lo = _var_inf(seq, False) if lo is None else _var_at(seq, _frac(lo))
    v_hi = _var_inf(seq, True) if hi is None else _var_at(seq, _frac(hi))
    return v_lo - v_hi


def squarefree_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: ``p = lead * Π f_i**i`` with ``f_i`` monic square-free.

    Only factors of positive degree are returned.
    """
    if p.degree < 1:
        return []
    a = poly_gcd(p, p.deriv())
    b = p // a
    c = p.deriv() // a
    d = c - b.deriv()
    out = []
    i = 1
    while b.degree > 0:
        g = poly_gcd(b, d)
        if g.degree > 0:
            out.append((g, i))
        b = b // g
        c = d // g
        d = c - b.deriv()
        i += 1
    return out


def squarefree_part(p: Poly) -> Poly:
    if p.degree < 1:
        return p.monic()
    return (p // poly_gcd(p, p.deriv())).monic()


def cauchy_bound(p: Poly) -> Fraction:
    """Strict bound: every real root lies in ``(-B, B)``."""
    lead = abs(p.lead)
    return 1 + max((abs(c) / lead for c in p.coeffs[:-1]), default=Fraction(0))


def simplest_rational(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational of smallest denominator (then smallest magnitude) in ``[lo, hi]``."""
    lo, hi = _frac(lo), _frac(hi)
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_rational(-hi, -lo)
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / simplest_rational(1 / (hi - fl), 1 / (lo - fl))


@dataclass(frozen=True)
class RealRoot:
    """Isolated real root of a square-free polynomial.

    ``lo == hi`` means the root is known exactly; otherwise the root is the
    unique one in the open interval ``(lo, hi)`` and the polynomial is nonzero
    with opposite signs at both endpoints.
    """

    lo: Fraction
    hi: Fraction

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2


def _try_exact(q: Poly, lo: Fraction, hi: Fraction) -> Fraction | None:
    r = simplest_rational(lo, hi)
    if lo < r < hi and q(r) == 0:
        return r
    return None


def isolate_real_roots(p: Poly) -> list[RealRoot]:
    """Isolate all distinct real roots of ``p``, sorted increasingly."""
    if p.is_zero():
        raise ValueError("zero polynomial has every real number as a root")
    q = squarefree_part(p)
    if q.degree < 1:
        return []
    seq = sturm_sequence(q)
    B = cauchy_bound(q)
    out: list[RealRoot] = []
    stack = [(-B, B, _var_at(seq, -B) - _var_at(seq, B))]
    while stack:
        a, b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            r = _try_exact(q, a, b)
            out.append(RealRoot(r, r) if r is not None else RealRoot(a, b))
            continue
        m = (a + b) / 2
        if q(m) == 0:
            out.append(RealRoot(m, m))
            eps = (b - a) / 4
            while True:
                l, h = m - eps, m + eps
                if q(l) != 0 and q(h) != 0 and _var_at(seq, l) - _var_at(seq, h) == 1:
                    break
                eps /= 2
            vl = _var_at(seq, l)
            vh = _var_at(seq, h)
            stack.append((a, l, _var_at(seq, a) - vl))
            stack.append((h, b, vh - _var_at(seq, b)))
        else:
            vm = _var_at(seq, m)
            stack.append((a, m, _var_at(seq, a) - vm))
            stack.append((m, b, vm - _var_at(seq, b)))
    out.sort(key=lambda r: r.lo)
    return out


def refine_root(p: Poly, root: RealRoot, width: Fraction) -> RealRoot:
    """Bisect an isolating interval of ``p`` (square-free part) below ``width``."""
    if root.exact or root.width <= width:
        return root
    q = squarefree_part(p)
    a, b = root.lo, root.hi
    sa = _sign(q(a))
    while b - a > width:
        m = (a + b) / 2
        sm = _sign(q(m))
        if sm == 0:
            return RealRoot(m, m)
        if sm == sa:
            a = m
        else:
            b = m
    r = _try_exact(q, a, b)
    return RealRoot(r, r) if r is not None else RealRoot(a, b)


@dataclass(frozen=True)
class Decision:
    """Outcome of :func:`nonneg_on_reals`.

    ``witness`` is a rational point where the polynomial is negative, and
    ``value`` the exact (negative) value there; both are ``None`` when the
    polynomial is nonnegative on the whole real line.
    """

    nonnegative: bool
    witness: Fraction | None = None
    value: Fraction | None = None


def _sample_points(p: Poly) -> list[Fraction]:
    """One rational point in every open component of ``R`` minus the roots of ``p``."""
    roots = isolate_real_roots(p)
    if not roots:
        return [Fraction(0)]
    first, last = roots[0], roots[-1]
    if first.exact:
        pts = [min(Fraction(0), Fraction(math.ceil(first.lo) - 1))]
    else:
        pts = [min(Fraction(0), Fraction(math.floor(first.lo)))]
    for left, right in zip(roots, roots[1:]):
        # non-exact endpoints are not roots, so they belong to the gap
        lo, hi = left.hi, right.lo
        if left.exact and right.exact:
            lo, hi = (3 * lo + hi) / 4, (lo + 3 * hi) / 4
        elif left.exact:
            lo = (lo + hi) / 2
        elif right.exact:
            hi = (lo + hi) / 2
        pts.append(simplest_rational(lo, hi))
    if last.exact:
        pts.append(max(Fraction(0), Fraction(math.floor(last.hi) + 1)))
    else:
        pts.append(max(Fraction(0), Fraction(math.ceil(last.hi))))
    return pts


def nonneg_on_reals(p: Poly) -> Decision:
    """Decide exactly whether ``p(x) >= 0`` for every real ``x``.

    ``p >= 0`` iff ``p`` is zero, or has even degree, positive leading
    coefficient and only even-multiplicity real roots. When the answer is no,
    the lowest sample point (one per sign-constant component) with a negative
    value is returned as witness.
    """
    if p.is_zero():
        return Decision(True)
    if p.degree == 0:
        return Decision(True) if p.lead > 0 else Decision(False, Fraction(0), p.lead)
    odd_part = Poly.const(1)
    for f, mult in squarefree_decomposition(p):
        if mult % 2:
            odd_part = odd_part * f
    ok = (p.degree % 2 == 0 and p.lead > 0
          and (odd_part.degree < 1 or count_real_roots(odd_part) == 0))
    if ok:
        return Decision(True)
    for x in _sample_points(p):
        v = p(x)
        if v < 0:
            return Decision(False, x, v)
    raise AssertionError(f"no negative sample found for {p!r}")


def _critical_roots(p: Poly) -> list[RealRoot]:
    dp = p.deriv()
    if dp.degree < 1:
        return []
    return isolate_real_roots(dp)


def _check_bounded_below(p: Poly) -> None:
    if p.degree > 0 and (p.degree % 2 or p.lead < 0):
        raise ValueError("polynomial is unbounded below")


def global_min(p: Poly, tol=Fraction(1, 2 ** 40)) -> tuple[Fraction, Fraction]:
    """Interval ``[lo, hi]`` of width ``<= tol`` containing ``inf p`` over the reals."""
    tol = _frac(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.is_zero():
        return Fraction(0), Fraction(0)
    _check_bounded_below(p)
    if p.degree == 0:
        return p.lead, p.lead
    dp = p.deriv()
    encl = []
    for r in _critical_roots(p):
        w = r.width
        while True:
            r = refine_root(dp, r, w)
            if r.exact:
                v = p(r.lo)
                encl.append((v, v))
                break
            lo, hi = p.interval_eval(r.lo, r.hi)
            if hi - lo <= tol:
                encl.append((lo, hi))
                break
            w = r.width / 4
    return min(e[0] for e in encl), min(e[1] for e in encl)


def exact_global_min(p: Poly) -> Fraction | None:
    """Exact infimum when every critical point is rational, else ``None``."""
    _check_bounded_below(p)
    if p.degree <= 0:
        return p.lead if p else Fraction(0)
    dp = p.deriv()
    vals = []
    for r in _critical_roots(p):
        if not r.exact:
            r = refine_root(dp, r, r.width / 2 ** 64)
        if not r.exact:
            return None
        vals.append(p(r.lo))
    return min(vals)
