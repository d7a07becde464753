"""Membership in the coefficient regions of Markov (nonnegative) Yule-to-OU kernels.

A coefficient vector ``a`` (with ``a_0 = 1``) defines the signed kernel whose
row ``y`` has density ``λ_a(y, ·)`` against the standard Gaussian. It is a
Markov kernel iff every row density is nonnegative on the real line, which
is decided exactly with :func:`~intertwine.polyalg.nonneg_on_reals`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .kernels import (
    ehrenfest_density_row,
    frac_str,
    lambda_a_reverse_row,
    lambda_a_row,
)
from .polyalg import Poly, exact_global_min, hermite, krawtchouk, nonneg_on_reals, phi_tilde

__all__ = [
    "Witness",
    "FeasibilityReport",
    "coeff_vector",
    "check_membership_A",
    "check_membership_reverse",
    "max_a2",
    "restriction_check",
    "ehrenfest_ou_witness",
    "reverse_witness",
]

BISECTION_STEP = Fraction(1, 2 ** 40)


def coeff_vector(a: Sequence, N: int | None = None) -> tuple[Fraction, ...]:
    """Validate and convert a coefficient vector (``a_0 = 1``, length ``N+1``)."""
    a = tuple(Fraction(v) for v in a)
    if not a:
        raise ValueError("coefficient vector must be nonempty")
    if a[0] != 1:
        raise ValueError(f"a_0 must equal 1, got {a[0]}")
    if N is not None and len(a) != N + 1:
        raise ValueError(f"expected {N + 1} coefficients, got {len(a)}")
    return a


@dataclass(frozen=True)
class Witness:
    """Row ``y`` has density value ``value < 0`` at ``x0``."""

    y: int
    x0: Fraction
    value: Fraction

    def to_json(self) -> dict:
        return {"y": self.y, "x0": frac_str(self.x0), "value": frac_str(self.value)}


@dataclass(frozen=True)
class FeasibilityReport:
    member: bool
    witness: Witness | None = None
    parity_violation: int | None = None

    def __post_init__(self):
        if self.member != (self.witness is None and self.parity_violation is None):
            raise ValueError("member must hold exactly when there is no witness and no parity violation")

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "witness": self.witness.to_json() if self.witness else None,
            "parityViolation": self.parity_violation,
        }


def _first_negative_row(rows) -> Witness | None:
    for y, p in rows:
        d = nonneg_on_reals(p)
        if not d.nonnegative:
            return Witness(y, d.witness, d.value)
    return None


def _parity_violation(a: Sequence[Fraction]) -> int | None:
    for n, v in enumerate(a):
        if (n % 2 and v != 0) or (n % 2 == 0 and v < 0):
            return n
    return None


def check_membership_A(N: int, a: Sequence) -> FeasibilityReport:
    """Decide whether ``Λ_a`` is a Markov kernel from ``[0, N]`` to ``R``.

    The parity screen (odd coefficients zero, even ones nonnegative) runs
    first. A violation at index ``n`` is also backed by a witness on row
    ``n``, whose top coefficient is then the offending ``a_n``.
    """
    a = coeff_vector(a, N)
    bad = _parity_violation(a)
    if bad is not None:
        w = _first_negative_row([(bad, lambda_a_row(a, bad))])
        if w is None:
            raise AssertionError(f"parity screen rejected a={a} but row {bad} is nonnegative")
        return FeasibilityReport(False, w, bad)
    w = _first_negative_row((y, lambda_a_row(a, y)) for y in range(N + 1))
    return FeasibilityReport(w is None, w)


def check_membership_reverse(N: int, a: Sequence) -> FeasibilityReport:
    """Same decision for the reverse-Yule kernel on ``[-N, 0]``."""
    a = coeff_vector(a, N)
    w = _first_negative_row((y, lambda_a_reverse_row(a, y)) for y in range(-N, 1))
    return FeasibilityReport(w is None, w)


def max_a2(N: int) -> Fraction:
    """Largest ``a_2`` with ``(1, 0, a_2, 0, ..., 0)`` feasible on ``[0, N]``.

    Row ``y`` reads ``1 + a_2 q_y`` with ``q_y = binom(y, 2) h_2 / 2``, so for
    ``a_2 >= 0`` it stays nonnegative iff ``1 + a_2 min(q_y) >= 0``. The
    exact minima give the threshold; membership just above and below it is
    re-checked as a guard.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    threshold = None
    for y in range(2, N + 1):
        q = hermite(2) * Fraction(math.comb(y, 2), 2)
        m = exact_global_min(q)
        if m is None:
            raise ArithmeticError(f"minimum of row {y} is not rational")
        if m < 0:
            t = -1 / m
            threshold = t if threshold is None else min(threshold, t)
    assert threshold is not None

    def family(v):
        return (Fraction(1), Fraction(0), v) + (Fraction(0),) * (N - 2)

    if not check_membership_A(N, family(threshold)).member:
        raise AssertionError(f"threshold {threshold} is not feasible")
    if not check_membership_A(N, family(threshold - BISECTION_STEP)).member:
        raise AssertionError("feasible region is not an interval below the threshold")
    if check_membership_A(N, family(threshold + BISECTION_STEP)).member:
        raise AssertionError(f"threshold {threshold} is not maximal")
    return threshold


def restriction_check(N: int, M: int, a: Sequence) -> bool:
    """For ``a`` feasible on ``[0, N]``, check that ``a[:M+1]`` is feasible on ``[0, M]``."""
    if not 0 <= M <= N:
        raise ValueError("need 0 <= M <= N")
    if not check_membership_A(N, a).member:
        raise ValueError("precondition failed: a is not feasible for N")
    return check_membership_A(M, tuple(a)[: M + 1]).member


def _nontrivial_top(a: Sequence[Fraction]) -> int:
    top = max((n for n, v in enumerate(a) if v != 0), default=0)
    if top == 0:
        raise ValueError("coefficient vector is trivial: no a_n != 0 with n >= 1")
    return top


def _tail_point(p: Poly, direction: int) -> Fraction:
    """Walk ``±1, ±2, ±4, ...`` until ``p`` is negative (needs a negative tail)."""
    x = Fraction(direction)
    while p(x) >= 0:
        x *= 2
    return x


def _certify(y: int, p: Poly, direction: int) -> Witness:
    x0 = _tail_point(p, direction)
    if nonneg_on_reals(p).nonnegative:
        raise AssertionError(f"row {y} has a negative value but was decided nonnegative")
    return Witness(y, x0, p(x0))


def ehrenfest_ou_witness(N: int, a: Sequence) -> Witness:
    """Negative point of an Ehrenfest-to-OU candidate kernel with ``a`` non-trivial.

    With ``n0`` the top nonzero index, the Krawtchouk vector ``K_{N,n0}``
    averages to zero under the binomial law, so some state ``y0`` makes the
    leading coefficient ``K_{N,n0}(y0) a_{n0} / n0!`` negative; that row goes
    to ``-inf`` as ``x -> +inf``.
    """
    a = coeff_vector(a, N)
    n0 = _nontrivial_top(a)
    k = krawtchouk(N, n0)
    y0 = next(y for y in range(N + 1) if k[y] * a[n0] < 0)
    return _certify(y0, ehrenfest_density_row(a, y0), +1)


def reverse_witness(N: int, a: Sequence) -> Witness:
    """Negative point of a reverse-Yule-to-OU candidate kernel with ``a`` non-trivial.

    ``φ̃_{n0}`` is nonzero with sign ``(-1)**y`` on ``[-n0+1, 0]``. For odd
    ``n0`` any of these rows has odd degree; for even ``n0`` the range holds
    both parities, so one row has a negative leading coefficient.
    """
    a = coeff_vector(a, N)
    n0 = _nontrivial_top(a)
    pt = phi_tilde(n0, N)
    candidates = range(1 - n0, 1)
    if n0 % 2:
        y0 = candidates[0]
        lead = a[n0] * pt[y0]
        direction = -1 if lead > 0 else 1
    else:
        y0 = next(y for y in candidates if a[n0] * pt[y] < 0)
        direction = 1
    return _certify(y0, lambda_a_reverse_row(a, y0), direction)
