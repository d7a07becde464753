"""Spectral evolution toward equilibrium, separation and total variation distances.

OU side: a law ``p γ`` with ``p = Σ c_n h_n`` evolves as ``c_n e^{-n t}``.
Ehrenfest side: a law on ``[0, N]`` is expanded in the Krawtchouk basis,
which diagonalizes ``L_N``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .coupling import hypo_survival
from .generators import binomial_measure
from .kernels import FiniteKernel, HermiteDensityKernel, pushforward
from .polyalg import HermiteMeasure, Poly, global_min, hermite, isolate_real_roots, krawtchouk, nonneg_on_reals, refine_root

__all__ = [
    "SeparationCurve",
    "ou_evolve",
    "separation",
    "tv_distance",
    "ehrenfest_evolve",
    "ehrenfest_separation",
    "ehrenfest_tv",
    "bound_curve",
]

SEPARATION_TOL = Fraction(1, 2 ** 40)
ROOT_WIDTH = Fraction(1, 2 ** 60)
# slack for float round-off when checking tv <= separation <= bound
CHAIN_SLACK = 1e-12


def ou_evolve(mu: HermiteMeasure, t: float) -> HermiteMeasure:
    """Law at time ``t`` of the OU diffusion started from ``mu``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return mu
    return HermiteMeasure((1,) + tuple(float(c) * math.exp(-n * t) for n, c in enumerate(mu.c) if n > 0))


def _checked_density(mu: HermiteMeasure) -> Poly:
    p = mu.density()
    d = nonneg_on_reals(p)
    if not d.nonnegative:
        raise ValueError(f"density is negative at x={d.witness} (value {float(d.value):.3g})")
    return p


def separation(mu: HermiteMeasure) -> float:
    """``1 - inf p`` for the density ``p`` of ``mu`` against ``γ``."""
    p = _checked_density(mu)
    lo, hi = global_min(p, SEPARATION_TOL)
    return float(1 - (lo + hi) / 2)


def _phi(x: float) -> float:
    return math.exp(-x * x / 2) / math.sqrt(2 * math.pi)


def tv_distance(mu: HermiteMeasure) -> float:
    """``(1/2) ∫ |p - 1| dγ``.

    ``p - 1 = Σ_{n >= 1} c_n h_n`` has constant sign between consecutive real
    roots, and ``∫_a^b h_n dγ = h_{n-1}(a) φ(a) - h_{n-1}(b) φ(b)`` for
    ``n >= 1``, so each piece integrates in closed form.
    """
    _checked_density(mu)
    c = [float(v) for v in mu.c]
    if all(v == 0 for v in c[1:]):
        return 0.0
    q = mu.density() - 1
    pts = [-math.inf]
    for r in isolate_real_roots(q):
        pts.append(float(refine_root(q, r, ROOT_WIDTH).midpoint()))
    pts.append(math.inf)
    prev = [hermite(n - 1) for n in range(1, len(c))]

    def boundary(x: float) -> float:
        if math.isinf(x):
            return 0.0
        w = _phi(x)
        return sum(cn * h(x) * w for cn, h in zip(c[1:], prev))

    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += abs(boundary(a) - boundary(b))
    return total / 2


@lru_cache(maxsize=None)
def _krawtchouk_basis(N: int):
    """Krawtchouk vectors and their squared norms in ``L^2(π_N)``."""
    pi = binomial_measure(N).values
    ks = [krawtchouk(N, n).values for n in range(N + 1)]
    norms = [sum((p * k * k for p, k in zip(pi, kv)), Fraction(0)) for kv in ks]
    return pi, ks, norms


def _check_law(m0: Sequence, size: int) -> list[Fraction]:
    m = [Fraction(v) for v in m0]
    if len(m) != size or any(v < 0 for v in m) or sum(m) != 1:
        raise ValueError("m0 must be a probability vector on [0, N]")
    return m


def ehrenfest_evolve(N: int, m0: Sequence, t: float) -> np.ndarray:
    """Law at time ``t`` of the Ehrenfest chain ``L_N`` started from ``m0``.

    ``m_t / π_N = e^{t L_N}[m_0 / π_N]`` by reversibility; the Krawtchouk
    coefficients of ``m_0 / π_N`` are ``<m_0, K_n> / ||K_n||²``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    pi, ks, norms = _krawtchouk_basis(N)
    m = _check_law(m0, N + 1)
    coef = [sum((mi * k for mi, k in zip(m, kv)), Fraction(0)) / nrm for kv, nrm in zip(ks, norms)]
    decay = np.exp(-np.arange(N + 1) * t)
    kmat = np.array([[float(v) for v in kv] for kv in ks])
    dens = (np.array([float(v) for v in coef]) * decay) @ kmat
    return np.array([float(p) for p in pi]) * dens


def ehrenfest_separation(N: int, law: np.ndarray) -> float:
    pi = np.array([float(p) for p in binomial_measure(N).values])
    return float(np.max(1 - law / pi))


def ehrenfest_tv(N: int, law: np.ndarray) -> float:
    pi = np.array([float(p) for p in binomial_measure(N).values])
    return float(np.abs(law - pi).sum() / 2)


@dataclass
class SeparationCurve:
    """Rows ``(t, separation, tv, bound)``."""

    t: list[float]
    separation: list[float]
    tv: list[float]
    bound: list[float]

    def rows(self):
        return list(zip(self.t, self.separation, self.tv, self.bound))

    def violations(self, slack: float = CHAIN_SLACK) -> list[int]:
        """Indices of rows breaking ``0 <= tv <= separation <= bound <= 1``."""
        bad = []
        for i, (t, s, tv, b) in enumerate(self.rows()):
            if not (-slack <= tv <= s + slack and s <= b + slack and b <= 1 + slack):
                bad.append(i)
        return bad

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "tv", "separation", "bound"])
        for t, s, tv, b in self.rows():
            w.writerow([f"{t:.12g}", f"{tv:.12g}", f"{s:.12g}", f"{b:.12g}"])
        return buf.getvalue()


def bound_curve(N: int, m0: Sequence, tgrid: Iterable[float], kernel) -> SeparationCurve:
    """Separation, total variation and the strong-stationary-time bound along ``tgrid``.

    ``kernel`` links the Yule chain on ``[0, N]`` to the target: a
    :class:`HermiteDensityKernel` (OU target) or a :class:`FiniteKernel`
    such as ``Λ̂_N`` (Ehrenfest target). The bound is
    ``Σ_y m0(y) P[E(1) + ... + E(y) > t]``.
    """
    m = _check_law(m0, N + 1)
    ts = [float(t) for t in tgrid]
    bound = [sum(float(w) * hypo_survival(y, t) for y, w in enumerate(m) if w) for t in ts]
    seps, tvs = [], []
    if isinstance(kernel, HermiteDensityKernel):
        mu0 = pushforward(m, kernel)
        for t in ts:
            mu = ou_evolve(mu0, t)
            seps.append(separation(mu))
            tvs.append(tv_distance(mu))
    elif isinstance(kernel, FiniteKernel):
        x0 = pushforward(m, kernel)
        if len(x0) != N + 1:
            raise ValueError("Ehrenfest target must live on [0, N]")
        for t in ts:
            law = ehrenfest_evolve(N, x0, t)
            seps.append(ehrenfest_separation(N, law))
            tvs.append(ehrenfest_tv(N, law))
    else:
        raise TypeError("kernel must be a FiniteKernel or a HermiteDensityKernel")
    return SeparationCurve(ts, seps, tvs, bound)
