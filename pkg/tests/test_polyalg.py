import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from intertwine.polyalg import (
    HermiteMeasure,
    Poly,
    X,
    count_real_roots,
    exact_global_min,
    gaussian_integral,
    gaussian_moment,
    global_min,
    hermite,
    isolate_real_roots,
    krawtchouk,
    nonneg_on_reals,
    phi,
    phi_tilde,
    refine_root,
    simplest_rational,
    squarefree_decomposition,
)

x_sym, z_sym = sp.symbols("x z")

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=12)
polys = st.lists(small_fracs, min_size=1, max_size=7).map(Poly)


def _sympy_poly(p):
    return sum(sp.Rational(c.numerator, c.denominator) * x_sym ** i for i, c in enumerate(p.coeffs))


def test_hermite_low_degrees():
    assert hermite(0) == Poly([1])
    assert hermite(1) == X
    assert hermite(2) == X * X - 1
    assert hermite(3) == Poly([0, -3, 0, 1])
    assert hermite(4) == Poly([3, 0, -6, 0, 1])


def test_hermite_matches_generating_function():
    # exp(xz - z^2/2) = sum h_n(x) z^n / n!
    series = sp.series(sp.exp(x_sym * z_sym - z_sym ** 2 / 2), z_sym, 0, 11).removeO()
    for n in range(11):
        expected = sp.expand(series.coeff(z_sym, n) * sp.factorial(n))
        assert sp.expand(_sympy_poly(hermite(n)) - expected) == 0


def test_hermite_negative_degree():
    with pytest.raises(ValueError):
        hermite(-1)


def test_hermite_orthogonality():
    for m in range(7):
        for n in range(7):
            val = gaussian_integral(hermite(m) * hermite(n))
            assert val == (math.factorial(n) if m == n else 0)


def test_gaussian_moments():
    assert [gaussian_moment(k) for k in range(7)] == [1, 0, 1, 0, 3, 0, 15]


def test_krawtchouk_examples():
    assert krawtchouk(2, 1).values == (-1, 0, 1)
    assert krawtchouk(1, 1).values == (Fraction(-1, 2), Fraction(1, 2))
    assert krawtchouk(3, 0).values == (1, 1, 1, 1)
    with pytest.raises(ValueError):
        krawtchouk(2, 3)


def test_krawtchouk_matches_sympy_series():
    for N in range(7):
        for xv in range(N + 1):
            gen = (1 + z_sym / 2) ** xv * (1 - z_sym / 2) ** (N - xv)
            coeffs = sp.Poly(sp.expand(gen), z_sym).all_coeffs()[::-1]
            for n in range(N + 1):
                c = coeffs[n] if n < len(coeffs) else 0
                assert krawtchouk(N, n)[xv] == Fraction(str(c * sp.factorial(n)))


def test_phi_values():
    assert phi(0, 4).values == (1, 1, 1, 1)
    assert phi(2, 4).values == (0, 0, 1, 3)
    assert phi(3, 3).values == (0, 0, 0)


def test_phi_tilde_values():
    v = phi_tilde(1, 2)
    assert v.offset == -2 and v.values == (0, 0, 1)
    assert phi_tilde(2, 2).values == (0, -1, 1)
    assert phi_tilde(3, 1).values == (-2, 1)
    with pytest.raises(ValueError):
        phi_tilde(0, 3)


def test_phi_tilde_recurrence():
    for n in range(1, 7):
        v = phi_tilde(n, 6)
        for y in range(-5, 1):
            assert v[y - 1] == Fraction(1 - n - y, 1 - y) * v[y]


def test_sturm_counts():
    p = (X - 1) * (X + 2) * (X - Fraction(1, 3))
    assert count_real_roots(p) == 3
    assert count_real_roots(X * X + 1) == 0
    assert count_real_roots(p, 0, 2) == 2


def test_squarefree_decomposition():
    p = (X - 1) ** 3 * (X + 1)
    parts = squarefree_decomposition(p)
    assert (X + 1, 1) in parts and (X - 1, 3) in parts


def test_isolate_real_roots_of_hermite():
    roots = isolate_real_roots(hermite(5))
    assert len(roots) == 5
    for r in roots:
        assert count_real_roots(hermite(5), r.lo, r.hi) == 1 or r.exact
    mids = sorted(float(refine_root(hermite(5), r, Fraction(1, 2 ** 30)).midpoint()) for r in roots)
    expected = sorted(float(v) for v in sp.Poly(_sympy_poly(hermite(5)), x_sym).nroots())
    for a, b in zip(mids, expected):
        assert abs(a - b) < 1e-8


def test_simplest_rational():
    assert simplest_rational(Fraction(1, 3), Fraction(2, 3)) == Fraction(1, 2)
    assert simplest_rational(Fraction(-7, 2), Fraction(5, 1)) == 0


def test_nonneg_examples():
    assert nonneg_on_reals(X * X).nonnegative
    assert nonneg_on_reals((X - 1) ** 2 * (X + 3) ** 2).nonnegative
    d = nonneg_on_reals(X * X - 1)
    assert not d.nonnegative and d.witness == 0 and d.value == -1
    d = nonneg_on_reals(X * X * Fraction(21, 20) - Fraction(1, 20))
    assert not d.nonnegative and d.witness == 0
    assert not nonneg_on_reals(X).nonnegative
    assert not nonneg_on_reals(Poly([-1])).nonnegative


@settings(max_examples=150, deadline=None)
@given(polys)
def test_nonneg_decision_is_consistent(p):
    d = nonneg_on_reals(p)
    if d.nonnegative:
        # no negative value on a fine grid
        for k in range(-40, 41):
            assert p(Fraction(k, 4)) >= 0
    else:
        assert p(d.witness) == d.value < 0


@settings(max_examples=100, deadline=None)
@given(polys)
def test_squares_are_nonnegative(p):
    assert nonneg_on_reals(p * p).nonnegative


def test_global_min_values():
    lo, hi = global_min(hermite(2))
    assert lo <= -1 <= hi
    lo, hi = global_min(hermite(4))
    assert abs(float(lo) + 6.0) < 1e-9
    assert hi - lo <= Fraction(1, 2 ** 40)
    assert exact_global_min(hermite(2)) == -1
    with pytest.raises(ValueError):
        global_min(X ** 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(small_fracs, min_size=1, max_size=4))
def test_global_min_encloses_sampled_minimum(cs):
    # even degree, positive leading coefficient
    p = Poly(cs) * Poly(cs) + X ** 4
    lo, hi = global_min(p)
    grid_min = min(p(Fraction(k, 64)) for k in range(-400, 401))
    assert lo <= grid_min


def test_hermite_measure_density():
    mu = HermiteMeasure((1, 0, 1))
    assert mu.density() == X * X
    with pytest.raises(ValueError):
        HermiteMeasure((2, 0))
