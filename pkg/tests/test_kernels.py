import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from intertwine import kernels
from intertwine.generators import binomial_measure, ehrenfest, reverse_yule, yule
from intertwine.linalg import is_zero, matmul
from intertwine.polyalg import HermiteMeasure, X, ValueVector, hermite, krawtchouk, phi
from intertwine.kernels import (
    FiniteKernel,
    density_kernel,
    kernel_polytope,
    lambda_a,
    lambda_a_reverse,
    lambda_chain,
    lambda_hat,
    lambda_hat_chain,
    lambda_step,
    pushforward,
    trivial_density_kernel,
    verify_finite_intertwining,
    verify_ou_intertwining,
)

h = Fraction(1, 2)


def test_lambda_step_small():
    assert lambda_step(0).entries == ((h, h),)
    assert lambda_step(1).entries == ((h, h, 0), (0, h, h))


def test_lambda_chain_closed_form():
    assert lambda_chain(1, 2).entries == ((h, h, 0), (0, h, h))
    assert lambda_chain(3, 3).entries == tuple(tuple(Fraction(int(i == j)) for j in range(4)) for i in range(4))
    with pytest.raises(ValueError):
        lambda_chain(3, 2)


def test_lambda_chain_equals_product():
    for N in range(9):
        for M in range(N + 1):
            prod = lambda_chain(M, M)
            for k in range(M, N):
                prod = prod @ lambda_step(k)
            assert prod == lambda_chain(M, N)


def test_lambda_hat_rows():
    assert lambda_hat(2).entries == (
        (Fraction(1, 4), h, Fraction(1, 4)),
        (0, h, h),
        (0, 0, 1),
    )
    for N in range(11):
        assert lambda_hat(N).row(0) == binomial_measure(N).values


def test_lambda_hat_chain_coincides():
    for N in range(9):
        for M in range(N + 1):
            assert lambda_hat_chain(M, N) == lambda_hat(M) @ lambda_chain(M, N)


def test_finite_intertwinings():
    assert is_zero(verify_finite_intertwining(ehrenfest(1), lambda_chain(1, 2), ehrenfest(2)))
    assert is_zero(verify_finite_intertwining(yule(2), lambda_hat(2), ehrenfest(2)))
    assert is_zero(verify_finite_intertwining(yule(1), lambda_hat_chain(1, 3), ehrenfest(3)))
    # a wrong pairing leaves a residual
    assert not is_zero(verify_finite_intertwining(ehrenfest(2), lambda_hat(2), ehrenfest(2)))
    with pytest.raises(ValueError):
        verify_finite_intertwining(ehrenfest(1), lambda_hat(2), ehrenfest(2))


@given(st.integers(0, 8))
def test_kernels_map_krawtchouk(N):
    for n in range(N + 2):
        expect = krawtchouk(N, n) if n <= N else ValueVector.zeros(0, N + 1)
        assert lambda_step(N).apply(krawtchouk(N + 1, n)) == expect
    for n in range(N + 1):
        assert lambda_hat(N).apply(krawtchouk(N, n)) == phi(n, N + 1).scale(Fraction(math.factorial(n), 2 ** n))


def test_kernel_validation():
    with pytest.raises(ValueError):
        FiniteKernel(0, 0, ((h, h), (1, 1)))
    with pytest.raises(ValueError):
        FiniteKernel(0, 0, ((2, -1),))


def test_kernel_json_roundtrip():
    k = lambda_hat(3)
    doc = json.loads(json.dumps(k.to_json()))
    assert doc["entries"][0][0] == "1/8"
    assert FiniteKernel.from_json(doc) == k


def test_lambda_a_rows():
    k = lambda_a(2, (1, 0, 2))
    assert k.row(2) == X * X
    assert k.row(0) == X ** 0
    k3 = lambda_a(3, (1, 0, Fraction(2, 3), 0))
    assert k3.row(3) == X * X
    trivial = lambda_a(3, (1, 0, 0, 0))
    assert all(trivial.row(y) == X ** 0 for y in range(4))
    with pytest.raises(ValueError):
        lambda_a(2, (2, 0, 1))


def test_lambda_a_rows_have_unit_mass_and_are_signed_allowed():
    k = lambda_a(2, (1, 1, 5))
    for y in range(3):
        assert k.integrate(X ** 0)[y] == 1


def test_reverse_rows_have_unit_mass():
    k = lambda_a_reverse(3, (1, Fraction(1, 3), Fraction(1, 5), Fraction(-1, 7)))
    assert k.offset == -3
    for y in range(-3, 1):
        assert k.integrate(X ** 0)[y] == 1


def test_ou_intertwining_certificates():
    assert verify_ou_intertwining(yule(2), lambda_a(2, (1, 0, 1)), 6).passed
    assert verify_ou_intertwining(yule(4), trivial_density_kernel(4), 6).passed
    assert verify_ou_intertwining(reverse_yule(3), lambda_a_reverse(3, (1, 2, 3, 4)), 6).passed
    with pytest.raises(ValueError):
        verify_ou_intertwining(yule(2), lambda_a(2, (1, 0, 1)), 1)


def test_ou_certificate_images():
    a = (1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))
    cert = verify_ou_intertwining(yule(3), lambda_a(3, a), 7)
    for n in range(8):
        expect = phi(n, 4).scale(a[n]) if n <= 3 else ValueVector.zeros(0, 4)
        assert cert.images[n] == expect


def test_square_density_kernel_fails():
    k = density_kernel([X ** 0, X * X])
    cert = verify_ou_intertwining(yule(1), k, 4)
    assert not cert.passed
    assert cert.images[2][1] == 2
    assert 2 in cert.failures()


def test_polytope_trivial_cases():
    for a, b in ((ehrenfest(2), yule(2)), (ehrenfest(3), yule(2))):
        poly = kernel_polytope(a, b)
        assert poly.feasible and not poly.nontrivial
        assert poly.unique is not None
        assert all(row == (1, 0, 0) for row in poly.unique.entries)
        assert poly.summary().startswith("trivial only")


def test_polytope_nontrivial_cases():
    poly = kernel_polytope(ehrenfest(1), ehrenfest(2))
    assert poly.nontrivial
    w = poly.witness
    assert is_zero(verify_finite_intertwining(ehrenfest(1), w, ehrenfest(2)))
    assert not w.is_row_constant()
    assert kernel_polytope(yule(2), ehrenfest(2)).nontrivial


def test_polytope_lp_agrees_with_vertices(monkeypatch):
    pairs = [(ehrenfest(1), ehrenfest(2)), (ehrenfest(2), yule(2)), (yule(2), ehrenfest(2))]
    by_vertex = [kernel_polytope(a, b) for a, b in pairs]
    monkeypatch.setattr(kernels, "MAX_VERTEX_DIM", -1)
    by_lp = [kernel_polytope(a, b) for a, b in pairs]
    for u, v in zip(by_vertex, by_lp):
        assert u.method == "vertices" and v.method == "lp"
        assert (u.feasible, u.nontrivial) == (v.feasible, v.nontrivial)


def test_polytope_size_limit():
    with pytest.raises(ValueError):
        kernel_polytope(ehrenfest(12), yule(2))


def test_pushforward():
    assert pushforward([0, 0, 1], lambda_hat(2)) == (0, 0, 1)
    assert pushforward([1, 0, 0], lambda_hat(2)) == (Fraction(1, 4), h, Fraction(1, 4))
    mu = pushforward([0, 0, 1], lambda_a(2, (1, 0, 2)))
    assert isinstance(mu, HermiteMeasure) and mu.c == (1, 0, 1)
    with pytest.raises(ValueError):
        pushforward([1, 0], lambda_hat(2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=9), min_size=3, max_size=3))
def test_pushforward_preserves_mass(w):
    total = sum(w)
    if total == 0:
        return
    m = [v / total for v in w]
    assert sum(pushforward(m, lambda_hat(2))) == 1
    assert pushforward(m, lambda_a(2, (1, 0, 1))).c[0] == 1
