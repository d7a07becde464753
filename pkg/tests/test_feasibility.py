from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intertwine.feasibility import (
    FeasibilityReport,
    Witness,
    check_membership_A,
    check_membership_reverse,
    coeff_vector,
    ehrenfest_ou_witness,
    max_a2,
    restriction_check,
    reverse_witness,
)
from intertwine.kernels import ehrenfest_density_row, lambda_a_reverse_row, lambda_a_row
from intertwine.selftest import random_nontrivial

# thresholds recomputed by hand: row y of (1, 0, a, 0, ...) is 1 + a binom(y, 2) (x^2 - 1) / 2,
# minimal at x = 0, so a <= 2 / binom(N, 2)
EXPECTED_MAX_A2 = {N: Fraction(2, N * (N - 1) // 2) for N in range(2, 9)}


def test_max_a2_small_N():
    assert max_a2(2) == 2
    assert max_a2(3) == Fraction(2, 3)


def test_max_a2_closed_form():
    for N, v in EXPECTED_MAX_A2.items():
        assert max_a2(N) == v


def test_max_a2_nonincreasing():
    vals = [max_a2(N) for N in range(2, 9)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_max_a2_rejects_small_N():
    with pytest.raises(ValueError):
        max_a2(1)


def test_membership_examples():
    assert check_membership_A(2, (1, 0, 2)).member
    assert check_membership_A(3, (1, 0, Fraction(2, 3), 0)).member
    rep = check_membership_A(2, (1, 0, 3))
    assert not rep.member and rep.witness.value < 0
    assert lambda_a_row((1, 0, 3), rep.witness.y)(rep.witness.x0) == rep.witness.value


def test_parity_screen():
    rep = check_membership_A(3, (1, 0, 1, 0))
    assert not rep.member
    assert rep.witness == Witness(3, Fraction(0), Fraction(-1, 2))
    rep = check_membership_A(2, (1, Fraction(1, 10), 0))
    assert rep.parity_violation == 1
    assert not rep.member and rep.witness.value < 0
    rep = check_membership_A(2, (1, 0, Fraction(-1, 10)))
    assert rep.parity_violation == 2


def test_report_invariant():
    with pytest.raises(ValueError):
        FeasibilityReport(True, Witness(0, Fraction(0), Fraction(-1)))
    with pytest.raises(ValueError):
        FeasibilityReport(False)


def test_coeff_vector_validation():
    with pytest.raises(ValueError):
        coeff_vector((2, 0))
    with pytest.raises(ValueError):
        coeff_vector((1, 0), 3)


def test_reverse_region_is_trivial():
    assert check_membership_reverse(3, (1, 0, 0, 0)).member
    assert not check_membership_reverse(2, (1, 0, 1)).member
    w = reverse_witness(2, (1, 0, Fraction(1, 10)))
    assert w.y == -1 and w.value < 0


def test_restriction():
    assert restriction_check(3, 2, (1, 0, Fraction(2, 3), 0))
    with pytest.raises(ValueError):
        restriction_check(2, 1, (1, 0, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.fractions(min_value=0, max_value=3, max_denominator=20))
def test_restriction_property(N, a2):
    a = (1, 0, a2) + (0,) * (N - 2)
    if check_membership_A(N, a).member:
        for M in range(N + 1):
            assert restriction_check(N, M, a)


def test_ehrenfest_witness_example():
    w = ehrenfest_ou_witness(1, (1, Fraction(1, 10)))
    assert w.y == 0 and w.x0 == 32
    assert ehrenfest_density_row((1, Fraction(1, 10)), 0)(w.x0) == w.value < 0


def test_witness_rejects_trivial():
    with pytest.raises(ValueError):
        ehrenfest_ou_witness(3, (1, 0, 0, 0))
    with pytest.raises(ValueError):
        reverse_witness(3, (1, 0, 0, 0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_witnesses(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 7))
    a = random_nontrivial(rng, N)
    w = ehrenfest_ou_witness(N, a)
    assert ehrenfest_density_row(a, w.y)(w.x0) == w.value < 0
    w = reverse_witness(N, a)
    assert lambda_a_reverse_row(a, w.y)(w.x0) == w.value < 0
    assert not check_membership_reverse(N, a).member


def test_witness_json():
    doc = Witness(2, Fraction(-4), Fraction(-13, 2)).to_json()
    assert doc == {"y": 2, "x0": "-4/1", "value": "-13/2"}
