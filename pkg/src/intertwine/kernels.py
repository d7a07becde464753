"""Intertwining kernels: construction, exact verification, and the kernel polytope."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .generators import FiniteGenerator
from .polyalg import (
    HermiteMeasure,
    Poly,
    ValueVector,
    gaussian_integral,
    hermite,
    krawtchouk,
    phi_tilde,
)

__all__ = [
    "FiniteKernel",
    "HermiteDensityKernel",
    "KernelPolytope",
    "OUCertificate",
    "lambda_step",
    "lambda_chain",
    "lambda_hat",
    "lambda_hat_chain",
    "embedding",
    "lambda_a",
    "lambda_a_reverse",
    "ehrenfest_density_kernel",
    "density_kernel",
    "trivial_density_kernel",
    "verify_finite_intertwining",
    "verify_ou_intertwining",
    "kernel_polytope",
    "pushforward",
    "frac_str",
    "parse_frac",
]

MAX_POLYTOPE_STATES = 12
MAX_VERTEX_DIM = 6
MAX_VERTEX_COMBINATIONS = 2000


def frac_str(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def parse_frac(s) -> Fraction:
    return Fraction(s)


@dataclass(frozen=True)
class FiniteKernel:
    """Stochastic matrix from ``[row_offset, ...]`` to ``[col_offset, ...]``."""

    row_offset: int
    col_offset: int
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        entries = tuple(tuple(Fraction(v) for v in row) for row in self.entries)
        if not entries or not entries[0] or any(len(r) != len(entries[0]) for r in entries):
            raise ValueError("kernel must be a nonempty rectangular matrix")
        for i, row in enumerate(entries):
            if any(v < 0 for v in row):
                raise ValueError(f"negative entry in row {i}")
            if sum(row) != 1:
                raise ValueError(f"row {i} sums to {sum(row)}, not 1")
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    @property
    def row_states(self) -> range:
        return range(self.row_offset, self.row_offset + self.shape[0])

    @property
    def col_states(self) -> range:
        return range(self.col_offset, self.col_offset + self.shape[1])

    def __call__(self, x: int, y: int) -> Fraction:
        return self.entries[x - self.row_offset][y - self.col_offset]

    def row(self, x: int) -> tuple[Fraction, ...]:
        return self.entries[x - self.row_offset]

    def apply(self, f: ValueVector) -> ValueVector:
        """``Λ[f](x) = Σ_y Λ(x, y) f(y)``."""
        if f.offset != self.col_offset or len(f) != self.shape[1]:
            raise ValueError("function is not defined on the kernel's column space")
        return ValueVector(
            self.row_offset,
            tuple(sum((a * b for a, b in zip(row, f.values) if a), Fraction(0)) for row in self.entries),
        )

    def __matmul__(self, other: "FiniteKernel") -> "FiniteKernel":
        if self.shape[1] != other.shape[0] or self.col_offset != other.row_offset:
            raise ValueError("kernels are not composable")
        return FiniteKernel(self.row_offset, other.col_offset, linalg.matmul(self.entries, other.entries))

    def is_row_constant(self) -> bool:
        return all(row == self.entries[0] for row in self.entries)

    def rank(self) -> int:
        return linalg.rank(self.entries)

    def to_json(self) -> dict:
        return {
            "rowOffset": self.row_offset,
            "colOffset": self.col_offset,
            "entries": [[frac_str(v) for v in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteKernel":
        return cls(
            int(doc["rowOffset"]),
            int(doc["colOffset"]),
            tuple(tuple(parse_frac(v) for v in row) for row in doc["entries"]),
        )


def lambda_step(N: int) -> FiniteKernel:
    """``Λ_N`` from ``[0, N]`` to ``[0, N+1]``: mass 1/2 on ``x`` and ``x+1``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    half = Fraction(1, 2)
    rows = [[half if y in (x, x + 1) else Fraction(0) for y in range(N + 2)] for x in range(N + 1)]
    return FiniteKernel(0, 0, rows)


def lambda_chain(M: int, N: int) -> FiniteKernel:
    """Closed form of ``Λ_M Λ_{M+1} ... Λ_{N-1}``."""
    if not 0 <= M <= N:
        raise ValueError(f"need 0 <= M <= N, got M={M}, N={N}")
    scale = Fraction(1, 2 ** (N - M))
    rows = [
        [scale * math.comb(N - M, y - x) if x <= y <= x + N - M else Fraction(0) for y in range(N + 1)]
        for x in range(M + 1)
    ]
    return FiniteKernel(0, 0, rows)


def lambda_hat(N: int) -> FiniteKernel:
    """``Λ̂_N(x, y) = 2**(x-N) binom(N-x, y-x)``; row ``x`` lives on ``[x, N]``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    rows = [
        [Fraction(math.comb(N - x, y - x), 2 ** (N - x)) if y >= x else Fraction(0) for y in range(N + 1)]
        for x in range(N + 1)
    ]
    return FiniteKernel(0, 0, rows)


def embedding(M: int, N: int) -> FiniteKernel:
    """Natural embedding of ``[0, M]`` into ``[0, N]`` as a Markov kernel."""
    if not 0 <= M <= N:
        raise ValueError(f"need 0 <= M <= N, got M={M}, N={N}")
    return FiniteKernel(0, 0, [[Fraction(int(x == y)) for y in range(N + 1)] for x in range(M + 1)])


def lambda_hat_chain(M: int, N: int) -> FiniteKernel:
    """``I_{M,N} Λ̂_N``, i.e. the first ``M+1`` rows of ``Λ̂_N``."""
    return embedding(M, N) @ lambda_hat(N)


def verify_finite_intertwining(a: FiniteGenerator, k: FiniteKernel, b: FiniteGenerator):
    """Exact residual ``A K - K B``; all zeros certifies the intertwining."""
    if a.size != k.shape[0] or a.offset != k.row_offset:
        raise ValueError(f"{a.name or 'A'} does not act on the kernel's row space")
    if b.size != k.shape[1] or b.offset != k.col_offset:
        raise ValueError(f"{b.name or 'B'} does not act on the kernel's column space")
    res = linalg.matsub(linalg.matmul(a.rates, k.entries), linalg.matmul(k.entries, b.rates))
    return tuple(tuple(row) for row in res)


# --------------------------------------------------------------------------
# kernels with polynomial densities against the standard Gaussian


@dataclass(frozen=True)
class HermiteDensityKernel:
    """Kernel from a finite state space to ``R`` with rows ``rows[y](x) γ(dx)``.

    Rows are exact polynomials; they may be signed. Each row must have total
    mass 1. ``a`` records the generating coefficients when the kernel came
    from one of the ``lambda_a`` constructors.
    """

    offset: int
    rows: tuple[Poly, ...]
    a: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise ValueError("kernel needs at least one row")
        for i, r in enumerate(rows):
            if gaussian_integral(r) != 1:
                raise ValueError(f"row {self.offset + i} does not have total mass 1")
        object.__setattr__(self, "rows", rows)
        if self.a is not None:
            object.__setattr__(self, "a", tuple(Fraction(v) for v in self.a))

    @property
    def N(self) -> int:
        return len(self.rows) - 1

    @property
    def states(self) -> range:
        return range(self.offset, self.offset + len(self.rows))

    def row(self, y: int) -> Poly:
        return self.rows[y - self.offset]

    def integrate(self, f: Poly) -> ValueVector:
        """``Λ[f](y) = ∫ f(x) λ(y, x) γ(dx)``, exactly."""
        return ValueVector(self.offset, tuple(gaussian_integral(f * r) for r in self.rows))

    def hermite_coefficients(self, y: int, depth: int | None = None) -> tuple[Fraction, ...]:
        """``c_n`` with ``row(y) = Σ c_n h_n``."""
        r = self.row(y)
        depth = r.degree if depth is None else depth
        return tuple(gaussian_integral(r * hermite(n)) / math.factorial(n) for n in range(depth + 1))


def _coeffs(N: int, a: Sequence) -> tuple[Fraction, ...]:
    a = tuple(Fraction(v) for v in a)
    if len(a) != N + 1:
        raise ValueError(f"expected {N + 1} coefficients, got {len(a)}")
    if a[0] != 1:
        raise ValueError("a_0 must equal 1")
    return a


def lambda_a_row(a: Sequence[Fraction], y: int) -> Poly:
    """``λ_a(y, ·) = Σ_{n <= y} (a_n / n!) binom(y, n) h_n``."""
    out = Poly()
    for n in range(min(y, len(a) - 1) + 1):
        if a[n]:
            out = out + hermite(n) * (a[n] * math.comb(y, n) / math.factorial(n))
    return out


def lambda_a(N: int, a: Sequence) -> HermiteDensityKernel:
    """Signed kernel ``Λ_a`` from ``[0, N]`` to ``R`` (nonnegativity not checked)."""
    a = _coeffs(N, a)
    return HermiteDensityKernel(0, tuple(lambda_a_row(a, y) for y in range(N + 1)), a)


def lambda_a_reverse_row(a: Sequence[Fraction], y: int) -> Poly:
    """Reverse-Yule row at ``y <= 0``: ``1 + Σ_{n >= 1} (a_n / n!) φ̃_n(y) h_n``."""
    N = len(a) - 1
    out = Poly.const(a[0])
    for n in range(max(1, 1 - y), N + 1):
        if a[n]:
            out = out + hermite(n) * (a[n] * phi_tilde(n, N)[y] / math.factorial(n))
    return out


def lambda_a_reverse(N: int, a: Sequence) -> HermiteDensityKernel:
    """Signed kernel from ``[-N, 0]`` to ``R`` built on the reverse-Yule eigenvectors."""
    a = _coeffs(N, a)
    return HermiteDensityKernel(-N, tuple(lambda_a_reverse_row(a, y) for y in range(-N, 1)), a)


def ehrenfest_density_row(a: Sequence[Fraction], y: int) -> Poly:
    """``Σ_n K_{N,n}(y) (a_n / n!) h_n`` with ``N = len(a) - 1``."""
    N = len(a) - 1
    out = Poly()
    for n in range(N + 1):
        if a[n]:
            out = out + hermite(n) * (krawtchouk(N, n)[y] * a[n] / math.factorial(n))
    return out


def ehrenfest_density_kernel(N: int, a: Sequence) -> HermiteDensityKernel:
    """Signed kernel from ``[0, N]`` to ``R`` built on Krawtchouk eigenvectors."""
    a = _coeffs(N, a)
    return HermiteDensityKernel(0, tuple(ehrenfest_density_row(a, y) for y in range(N + 1)), a)


def density_kernel(rows: Sequence[Poly], offset: int = 0) -> HermiteDensityKernel:
    return HermiteDensityKernel(offset, tuple(rows))


def trivial_density_kernel(N: int, offset: int = 0) -> HermiteDensityKernel:
    """Every row equal to ``γ``."""
    return HermiteDensityKernel(offset, (Poly.const(1),) * (N + 1), (Fraction(1),) + (Fraction(0),) * N)


@dataclass(frozen=True)
class OUCertificate:
    """Images ``Λ[h_n]`` and residuals ``G Λ[h_n] + n Λ[h_n]`` for ``n <= depth``."""

    images: tuple[ValueVector, ...]
    residuals: tuple[ValueVector, ...]

    @property
    def passed(self) -> bool:
        return all(r.is_zero() for r in self.residuals)

    def failures(self) -> list[int]:
        return [n for n, r in enumerate(self.residuals) if not r.is_zero()]


def verify_ou_intertwining(g: FiniteGenerator, k: HermiteDensityKernel, depth: int) -> OUCertificate:
    """Check ``G Λ = Λ L`` on ``h_0, ..., h_depth``.

    Since ``L h_n = -n h_n``, the relation holds on ``h_n`` iff ``Λ[h_n]`` is
    an eigenvector of ``G`` for ``-n`` (or zero). Polynomials of degree above
    ``depth`` are not tested; pass ``depth`` at least the largest row degree
    so that every nonzero image is covered.
    """
    if g.offset != k.offset or g.size != len(k.rows):
        raise ValueError("generator and kernel live on different state spaces")
    if depth < k.N:
        raise ValueError("depth must be at least N")
    images, residuals = [], []
    for n in range(depth + 1):
        img = k.integrate(hermite(n))
        images.append(img)
        residuals.append(g.apply(img) + img.scale(n))
    return OUCertificate(tuple(images), tuple(residuals))


# --------------------------------------------------------------------------
# the polytope of intertwining kernels


@dataclass
class KernelPolytope:
    """Stochastic solutions ``Λ`` of ``A Λ = Λ B``.

    ``particular`` and ``basis`` describe the affine space of (signed)
    solutions with unit row sums. ``feasible`` says whether it meets the
    nonnegative orthant; ``nontrivial`` whether it contains a Markov kernel
    whose rows are not all equal, with ``witness`` such a kernel.
    """

    row_offset: int
    col_offset: int
    particular: tuple[tuple[Fraction, ...], ...]
    basis: list[tuple[tuple[Fraction, ...], ...]]
    feasible: bool
    nontrivial: bool
    method: str
    witness: FiniteKernel | None = None
    vertices: list[FiniteKernel] | None = None
    unique: FiniteKernel | None = None
    max_rank: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def summary(self) -> str:
        if not self.feasible:
            return "no Markov kernel intertwines"
        if self.unique is not None:
            if self.unique.is_row_constant():
                return "trivial only: unique kernel with every row " + _describe_row(self.unique.entries[0], self.col_offset)
            return "unique non-trivial kernel"
        if not self.nontrivial:
            return "trivial only"
        return f"non-trivial intertwinings exist (max rank {self.max_rank})"


def _describe_row(row, offset: int) -> str:
    support = [i for i, v in enumerate(row) if v]
    if len(support) == 1 and row[support[0]] == 1:
        return f"δ_{offset + support[0]}"
    return "(" + ", ".join(frac_str(v) for v in row) + ")"


def _reshape(x: Sequence[Fraction], nr: int, nc: int) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(x[i * nc:(i + 1) * nc]) for i in range(nr))


def _intertwining_system(a: FiniteGenerator, b: FiniteGenerator):
    nr, nc = a.size, b.size
    n = nr * nc
    rows, rhs = [], []
    for i in range(nr):
        for j in range(nc):
            eq = [Fraction(0)] * n
            for k in range(nr):
                if a.rates[i][k]:
                    eq[k * nc + j] += a.rates[i][k]
            for k in range(nc):
                if b.rates[k][j]:
                    eq[i * nc + k] -= b.rates[k][j]
            rows.append(eq)
            rhs.append(Fraction(0))
    for i in range(nr):
        rows.append([Fraction(int(i * nc <= e < (i + 1) * nc)) for e in range(n)])
        rhs.append(Fraction(1))
    return rows, rhs


def _vertices(particular, basis):
    """Vertices of ``{p + B t >= 0}`` (bounded), in a deterministic order."""
    d = len(basis)
    n = len(particular)
    cons = {}
    for e in range(n):
        g = tuple(bk[e] for bk in basis)
        if not any(g):
            if particular[e] < 0:
                return []
            continue
        cons.setdefault((g, particular[e]), e)
    cons = sorted(cons.items(), key=lambda kv: kv[1])
    gs = [c[0][0] for c in cons]
    ps = [c[0][1] for c in cons]
    if d == 0:
        return [tuple(particular)] if all(v >= 0 for v in particular) else []
    if math.comb(len(gs), d) > MAX_VERTEX_COMBINATIONS:
        return None
    seen = {}
    for combo in itertools.combinations(range(len(gs)), d):
        t = linalg.solve_square([gs[i] for i in combo], [-ps[i] for i in combo])
        if t is None:
            continue
        if all(sum((gi * ti for gi, ti in zip(g, t)), Fraction(0)) + p >= 0 for g, p in zip(gs, ps)):
            x = tuple(particular[e] + sum((bk[e] * tk for bk, tk in zip(basis, t)), Fraction(0))
                      for e in range(n))
            seen.setdefault(x, None)
    return list(seen)


def kernel_polytope(a: FiniteGenerator, b: FiniteGenerator) -> KernelPolytope:
    """Solve ``A Λ = Λ B`` with unit row sums and decide non-trivial Markov solutions.

    Vertex enumeration is used when the solution space has dimension at most
    6 (and the number of active-set candidates is moderate); otherwise exact
    LP over the stochastic matrices decides feasibility and non-triviality.
    """
    if a.size > MAX_POLYTOPE_STATES or b.size > MAX_POLYTOPE_STATES:
        raise ValueError(f"state spaces are limited to {MAX_POLYTOPE_STATES} states")
    nr, nc = a.size, b.size
    e, rhs = _intertwining_system(a, b)
    sol = linalg.solve_affine(e, rhs)
    if sol is None:
        return KernelPolytope(a.offset, b.offset, (), [], False, False, "elimination")
    particular, basis = sol
    shaped_basis = [_reshape(v, nr, nc) for v in basis]
    verts = _vertices(particular, basis) if len(basis) <= MAX_VERTEX_DIM else None
    if verts is not None:
        kernels = [FiniteKernel(a.offset, b.offset, _reshape(v, nr, nc)) for v in verts]
        nontriv = [k for k in kernels if not k.is_row_constant()]
        return KernelPolytope(
            a.offset, b.offset, _reshape(particular, nr, nc), shaped_basis,
            feasible=bool(kernels),
            nontrivial=bool(nontriv),
            method="vertices",
            witness=nontriv[0] if nontriv else None,
            vertices=kernels,
            unique=kernels[0] if len(kernels) == 1 else None,
            max_rank=max((k.rank() for k in kernels), default=None),
        )
    return _polytope_by_lp(a, b, e, rhs, particular, shaped_basis)


def _polytope_by_lp(a, b, e, rhs, particular, shaped_basis) -> KernelPolytope:
    nr, nc = a.size, b.size
    n = nr * nc
    res = linalg.lp_minimize(e, rhs, [Fraction(0)] * n)
    base = dict(row_offset=a.offset, col_offset=b.offset,
                particular=_reshape(particular, nr, nc), basis=shaped_basis, method="lp")
    if res.status != "optimal":
        return KernelPolytope(feasible=False, nontrivial=False, **base)
    first = FiniteKernel(a.offset, b.offset, _reshape(res.x, nr, nc))
    witness = None
    for i in range(1, nr):
        for j in range(nc):
            c = [Fraction(0)] * n
            c[j] = Fraction(1)
            c[i * nc + j] = Fraction(-1)
            r = linalg.lp_minimize(e, rhs, c)
            if r.status == "optimal" and r.value < 0:
                witness = FiniteKernel(a.offset, b.offset, _reshape(r.x, nr, nc))
                break
        if witness is not None:
            break
    unique = None
    if witness is None:
        # trivial points form {row-constant}; uniqueness is decided entrywise
        unique = first
        for j in range(nc):
            c = [Fraction(0)] * n
            c[j] = Fraction(1)
            lo = linalg.lp_minimize(e, rhs, c).value
            hi = -linalg.lp_minimize(e, rhs, [-v for v in c]).value
            if lo != hi:
                unique = None
                break
    return KernelPolytope(
        feasible=True,
        nontrivial=witness is not None,
        witness=witness,
        unique=unique,
        max_rank=(witness or first).rank(),
        **base,
    )


def pushforward(m: Sequence, k):
    """Mixture ``m Λ`` of the kernel rows.

    Returns a tuple of probabilities for a :class:`FiniteKernel` and a
    :class:`HermiteMeasure` for a :class:`HermiteDensityKernel`.
    """
    m = tuple(Fraction(v) for v in m)
    if isinstance(k, FiniteKernel):
        if len(m) != k.shape[0]:
            raise ValueError("dimension mismatch")
        return tuple(sum((mi * row[j] for mi, row in zip(m, k.entries)), Fraction(0))
                     for j in range(k.shape[1]))
    if len(m) != len(k.rows):
        raise ValueError("dimension mismatch")
    density = Poly()
    for mi, r in zip(m, k.rows):
        if mi:
            density = density + r * mi
    depth = max(density.degree, 0)
    c = tuple(gaussian_integral(density * hermite(n)) / math.factorial(n) for n in range(depth + 1))
    return HermiteMeasure(c)
