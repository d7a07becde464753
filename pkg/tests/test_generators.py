from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from intertwine.generators import (
    binomial_measure,
    check_eigen,
    ehrenfest,
    ou_apply,
    reverse_yule,
    yule,
)
from intertwine.polyalg import ValueVector, hermite, krawtchouk, phi, phi_tilde


def test_ehrenfest_rates():
    L = ehrenfest(2)
    assert L.rate(0, 1) == 1 and L.rate(1, 0) == Fraction(1, 2)
    assert L.rate(1, 1) == -1
    assert L.max_exit_rate() == 1


def test_yule_is_pure_death():
    D = yule(3)
    assert [-D.rate(x, x) for x in range(4)] == [0, 1, 2, 3]
    assert D.rate(2, 1) == 2 and D.rate(2, 3) == 0


def test_reverse_yule_layout():
    R = reverse_yule(2)
    assert list(R.states) == [-2, -1, 0]
    assert R.rate(0, -1) == 1 and R.rate(-1, -2) == 2
    assert R.rate(-2, -2) == 0


def test_generator_validation():
    from intertwine.generators import FiniteGenerator

    with pytest.raises(ValueError):
        FiniteGenerator(0, ((0, 1), (1, -1)))
    with pytest.raises(ValueError):
        FiniteGenerator(0, ((1, -1), (0, 0)))


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        ehrenfest(2).apply(ValueVector(0, (1, 2)))


@given(st.integers(0, 10))
def test_full_spectra(N):
    for n in range(N + 1):
        assert check_eigen(ehrenfest(N), krawtchouk(N, n), n).is_zero()
        assert check_eigen(yule(N), phi(n, N + 1), n).is_zero()
        v = ValueVector(-N, (Fraction(1),) * (N + 1)) if n == 0 else phi_tilde(n, N)
        assert check_eigen(reverse_yule(N), v, n).is_zero()


def test_wrong_eigenvalue_has_residual():
    assert not check_eigen(ehrenfest(3), krawtchouk(3, 1), 2).is_zero()


def test_ou_eigenfunctions():
    for n in range(11):
        assert ou_apply(hermite(n)) == hermite(n) * (-n)


@given(st.integers(0, 10))
def test_binomial_measure_is_stationary(N):
    pi = binomial_measure(N)
    assert all(v == 0 for v in ehrenfest(N).left_apply(pi.values))
    assert sum(pi.values) == 1
