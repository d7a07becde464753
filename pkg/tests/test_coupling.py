import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intertwine.coupling import (
    JointState,
    Trajectory,
    absorption_time,
    build_coupling,
    hypo_sample,
    hypo_survival,
    manifest,
    simulate,
    simulate_many,
    step,
    stream,
    trajectories_csv,
)
from intertwine.generators import ehrenfest, yule
from intertwine.kernels import lambda_chain, lambda_hat
from intertwine.selftest import survival_by_convolution


def pair(N, theta=None):
    return build_coupling(yule(N), lambda_hat(N), ehrenfest(N), theta)


def test_build_coupling_thetas():
    assert pair(2, 2).theta == 2
    for N in range(1, 11):
        assert pair(N, N).theta == N
        assert pair(N).theta == N
    with pytest.raises(ValueError):
        pair(2, 1)
    with pytest.raises(ValueError):
        build_coupling(ehrenfest(2), lambda_hat(2), ehrenfest(2))


def test_ehrenfest_pair_coupling():
    p = build_coupling(ehrenfest(1), lambda_chain(1, 3), ehrenfest(3))
    assert p.theta == Fraction(3, 2)


def test_conditional_tables_exact():
    for N in range(1, 7):
        p = pair(N)
        for probs in p.y_tables.values():
            assert sum(q for _, q in probs) == 1


def test_absorbing_row_keeps_y():
    p = pair(3)
    rng = stream(1, 0)
    for x in range(4):
        s = JointState(x, 0)
        for _ in range(20):
            s = step(p, s, rng)
            assert s.y == 0


def test_top_state_moves_down_by_one_at_most():
    p = pair(4)
    for k in range(200):
        s = step(p, JointState(4, 4), stream(3, k))
        assert s.y in (3, 4)
        assert p.in_support(s)


def test_step_rejects_unsupported_state():
    with pytest.raises(ValueError):
        step(pair(2), JointState(0, 2), stream(0, 0))


def test_simulate_horizon_zero_and_delta_start():
    p = pair(2)
    tr = simulate(p, [0, 0, 1], 0.0, stream(5, 0))
    assert tr.times == (0.0,) and tr.xs == (2,) and tr.ys == (2,)
    for k in range(50):
        assert simulate(p, [0, 0, 1], 3.0, stream(5, k)).xs[0] == 2


def test_support_invariant_along_paths():
    p = pair(3)
    for tr in simulate_many(p, [0, 0, 0, 1], 5.0, 200, seed=9):
        for _, s in tr.events:
            assert p.link(s.y, s.x) > 0
        assert list(tr.times) == sorted(set(tr.times))


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory((0.5,), (0,), (0,), 1.0)
    with pytest.raises(ValueError):
        Trajectory((0.0, 0.0), (0, 1), (0, 0), 1.0)


def test_absorption_time():
    p = pair(3)
    tr = simulate(p, [1, 0, 0, 0], 2.0, stream(0, 0))
    assert absorption_time(tr) == 0.0
    tr = Trajectory((0.0, 1.0), (1, 1), (1, 1), 2.0)
    assert absorption_time(tr) is None


def test_mean_absorption_time():
    p = pair(3)
    trajs = simulate_many(p, [0, 0, 0, 1], 30.0, 20000, seed=1)
    taus = np.array([absorption_time(t) for t in trajs])
    mean = 1 + 1 / 2 + 1 / 3
    # standard deviation of the sum of E(1), E(2), E(3)
    sd = math.sqrt(1 + 1 / 4 + 1 / 9)
    assert abs(taus.mean() - mean) < 4 * sd / math.sqrt(len(taus))


def test_streams_independent_of_worker_count():
    p = pair(2)
    a = simulate_many(p, [0, 0, 1], 4.0, 40, seed=3, workers=1)
    b = simulate_many(p, [0, 0, 1], 4.0, 40, seed=3, workers=2)
    assert a == b
    c = simulate_many(p, [0, 0, 1], 4.0, 40, seed=4, workers=1)
    assert a != c


def test_csv_and_manifest():
    p = pair(1)
    trajs = simulate_many(p, [0, 1], 2.0, 3, seed=0)
    text = trajectories_csv(trajs)
    assert text.startswith("time,x,y\n")
    assert text.count("\n0.0,") == 3
    assert "\r" not in text
    doc = manifest(0, p, 2.0, trajs)
    assert '"theta": "1/1"' in doc and '"trajectories": 3' in doc


def test_hypo_survival_examples():
    assert hypo_survival(3, 0) == 1
    assert hypo_survival(1, 0.7) == pytest.approx(math.exp(-0.7), abs=1e-15)
    assert hypo_survival(2, math.log(2)) == pytest.approx(0.75, abs=1e-15)
    assert hypo_survival(0, 1.0) == 0
    with pytest.raises(ValueError):
        hypo_survival(2, -1.0)


def test_hypo_closed_form_matches_convolution():
    ts = np.linspace(0.1, 5.0, 50)
    for N in range(1, 6):
        closed = np.array([hypo_survival(N, t) for t in ts])
        assert np.max(np.abs(closed - survival_by_convolution(N, ts))) < 1e-10


def test_convolution_oracle_against_quad():
    # the quadrature oracle itself against scipy's adaptive integration for N = 2
    from scipy.integrate import quad

    for t in (0.3, 1.0, 4.0):
        tail, _ = quad(lambda s: math.exp(-s) * math.exp(-2 * (t - s)), 0, t, epsabs=1e-14)
        assert abs(math.exp(-t) + tail - survival_by_convolution(2, np.array([t]))[0]) < 1e-12


def test_hypo_sample_moments():
    rng = np.random.default_rng(0)
    xs = np.array([hypo_sample(3, rng) for _ in range(20000)])
    assert abs(xs.mean() - (1 + 1 / 2 + 1 / 3)) < 0.05


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.floats(0, 20), st.floats(0, 20))
def test_hypo_survival_monotone(N, s, t):
    lo, hi = sorted((s, t))
    assert 0 <= hypo_survival(N, hi) <= hypo_survival(N, lo) <= 1
    assert hypo_survival(N + 1, lo) >= hypo_survival(N, lo)
