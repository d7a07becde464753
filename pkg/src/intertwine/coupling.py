"""Intertwined coupling of two finite chains by uniformization, and its absorption time.

Given ``L^Y Λ = Λ L^X`` and a rate ``θ`` at least every exit rate, the
stochastic matrices ``K = I + L^X/θ`` and ``K̂ = I + L^Y/θ`` satisfy
``K̂ Λ = Λ K``. At each Poisson(θ) event the pair ``(x, y)`` moves by

    x' ~ K(x, ·),   y' ~ K̂(y, y') Λ(y', x') / (K̂ Λ)(y, x'),

which keeps ``L(X_t | Y_[0,t]) = Λ(Y_t, ·)``.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .generators import FiniteGenerator
from .kernels import FiniteKernel, frac_str, verify_finite_intertwining
from .linalg import matmul

__all__ = [
    "UniformizedPair",
    "JointState",
    "Trajectory",
    "build_coupling",
    "step",
    "simulate",
    "simulate_many",
    "stream",
    "absorption_time",
    "hypo_survival",
    "hypo_sample",
    "worker_count",
    "trajectories_csv",
    "manifest",
]


def _uniformize(gen: FiniteGenerator, theta: Fraction) -> tuple[tuple[Fraction, ...], ...]:
    n = gen.size
    return tuple(
        tuple((1 if i == j else 0) + gen.rates[i][j] / theta for j in range(n)) for i in range(n)
    )


def _cumulative(probs: Sequence[Fraction]) -> list[float]:
    out, acc = [], Fraction(0)
    for p in probs:
        acc += p
        out.append(float(acc))
    out[-1] = 1.0
    return out


@dataclass(frozen=True)
class JointState:
    x: int
    y: int


@dataclass
class UniformizedPair:
    """Uniformized chains ``K``, ``K̂`` linked by ``Λ``, with exact transition tables.

    ``y_tables[(y, x')]`` lists ``(y', P[y' | y, x'])`` for every ``(y, x')``
    with ``(K̂ Λ)(y, x') > 0``; the probabilities sum to exactly 1.
    """

    K: tuple
    Khat: tuple
    link: FiniteKernel
    theta: Fraction
    x_offset: int = 0
    y_offset: int = 0
    y_tables: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        khat_link = matmul(self.Khat, self.link.entries)
        if khat_link != matmul(self.link.entries, self.K):
            raise ValueError("K̂ Λ != Λ K")
        ny, nx = self.link.shape
        tables = {}
        for i in range(ny):
            for j in range(nx):
                den = khat_link[i][j]
                if den == 0:
                    continue
                probs = [(self.y_offset + k, self.Khat[i][k] * self.link.entries[k][j] / den)
                         for k in range(ny) if self.Khat[i][k] and self.link.entries[k][j]]
                total = sum(p for _, p in probs)
                if total != 1:
                    raise AssertionError(f"conditional law at (y={self.y_offset + i}, x'={self.x_offset + j}) sums to {total}")
                tables[(self.y_offset + i, self.x_offset + j)] = tuple(probs)
        self.y_tables = tables
        # float samplers derived from the exact tables
        self._x_cum = [_cumulative(row) for row in self.K]
        self._y_cum = {k: ([s for s, _ in v], _cumulative([p for _, p in v])) for k, v in tables.items()}

    def sample_x(self, x: int, u: float) -> int:
        row = self._x_cum[x - self.x_offset]
        return self.x_offset + bisect.bisect_right(row, u)

    def sample_y(self, y: int, x_new: int, u: float) -> int:
        states, cum = self._y_cum[(y, x_new)]
        return states[bisect.bisect_right(cum, u)]

    def in_support(self, s: JointState) -> bool:
        return self.link(s.y, s.x) > 0

    def to_json(self) -> dict:
        return {"theta": frac_str(self.theta), "link": self.link.to_json()}


def build_coupling(LY: FiniteGenerator, link: FiniteKernel, LX: FiniteGenerator, theta=None) -> UniformizedPair:
    """Certify ``L^Y Λ = Λ L^X`` and uniformize both chains at rate ``theta``.

    ``theta`` defaults to the largest exit rate of the two generators.
    """
    residual = verify_finite_intertwining(LY, link, LX)
    if any(v != 0 for row in residual for v in row):
        raise ValueError("intertwining certificate failed: L^Y Λ != Λ L^X")
    needed = max(LY.max_exit_rate(), LX.max_exit_rate())
    theta = needed if theta is None else Fraction(theta)
    if needed == 0 and theta == 0:
        theta = Fraction(1)
    if theta < needed:
        raise ValueError(f"theta={theta} is below the largest exit rate {needed}")
    return UniformizedPair(_uniformize(LX, theta), _uniformize(LY, theta), link, theta, LX.offset, LY.offset)


def step(pair: UniformizedPair, s: JointState, rng: np.random.Generator) -> JointState:
    if not pair.in_support(s):
        raise ValueError(f"state {s} is outside the support of Λ(y, ·)")
    u, v = rng.random(2)
    x_new = pair.sample_x(s.x, u)
    return JointState(x_new, pair.sample_y(s.y, x_new, v))


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-constant path; only jumps are recorded, the first at time 0."""

    times: tuple[float, ...]
    xs: tuple[int, ...]
    ys: tuple[int, ...]
    horizon: float

    def __post_init__(self):
        if not self.times or self.times[0] != 0.0:
            raise ValueError("trajectory must start at time 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("event times must be strictly increasing")

    @property
    def events(self) -> list[tuple[float, JointState]]:
        return [(t, JointState(x, y)) for t, x, y in zip(self.times, self.xs, self.ys)]

    def state_at(self, t: float) -> JointState:
        if not 0 <= t <= self.horizon:
            raise ValueError("time outside [0, horizon]")
        i = bisect.bisect_right(self.times, t) - 1
        return JointState(self.xs[i], self.ys[i])


def stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, index)``."""
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=seed | (index << 64)))


def _draw(rng: np.random.Generator, states, cum: list[float]):
    return states[bisect.bisect_right(cum, rng.random())]


def simulate(pair: UniformizedPair, m0: Sequence, horizon: float, rng: np.random.Generator) -> Trajectory:
    """One path on ``[0, horizon]`` started from ``y0 ~ m0`` and ``x0 ~ Λ(y0, ·)``."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    m0 = [Fraction(v) for v in m0]
    if len(m0) != pair.link.shape[0] or sum(m0) != 1 or any(v < 0 for v in m0):
        raise ValueError("m0 must be a probability vector on the Y states")
    y = _draw(rng, pair.link.row_states, _cumulative(m0))
    x = _draw(rng, pair.link.col_states, _cumulative(pair.link.row(y)))
    times, xs, ys = [0.0], [x], [y]
    theta = float(pair.theta)
    support = pair.link
    t = 0.0
    block = max(16, int(theta * horizon * 1.2) + 8)
    while True:
        gaps = rng.exponential(1 / theta, size=block)
        us = rng.random(2 * block)
        for k in range(block):
            t += gaps[k]
            if t > horizon:
                return Trajectory(tuple(times), tuple(xs), tuple(ys), horizon)
            x_new = pair.sample_x(x, us[2 * k])
            y_new = pair.sample_y(y, x_new, us[2 * k + 1])
            if x_new != x or y_new != y:
                x, y = x_new, y_new
                if support(y, x) == 0:
                    raise AssertionError(f"support invariant broken at t={t}: x={x}, y={y}")
                times.append(t)
                xs.append(x)
                ys.append(y)


def worker_count() -> int:
    raw = os.environ.get("WORKER_COUNT", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"WORKER_COUNT must be an integer, got {raw!r}") from None
    return max(1, n)


def _simulate_range(args):
    pair, m0, horizon, seed, lo, hi = args
    return [simulate(pair, m0, horizon, stream(seed, i)) for i in range(lo, hi)]


def simulate_many(pair, m0, horizon: float, n: int, seed: int = 0, workers: int | None = None) -> list[Trajectory]:
    """``n`` independent paths; path ``i`` uses ``stream(seed, i)`` whatever ``workers`` is."""
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or n < 2 * workers:
        return _simulate_range((pair, m0, horizon, seed, 0, n))
    bounds = [n * k // workers for k in range(workers + 1)]
    jobs = [(pair, m0, horizon, seed, lo, hi) for lo, hi in zip(bounds, bounds[1:])]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(_simulate_range, jobs):
            out.extend(part)
    return out


def absorption_time(traj: Trajectory, target: int = 0) -> float | None:
    """First time ``Y`` hits ``target``, or ``None`` if not before the horizon."""
    for t, y in zip(traj.times, traj.ys):
        if y == target:
            return t
    return None


def hypo_survival(N: int, t: float) -> float:
    """``P[E(1) + ... + E(N) > t] = 1 - (1 - e^{-t})^N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if N == 0:
        return 0.0
    if t == 0:
        return 1.0
    # log(1 - e^{-t}), accurate at both ends
    log_cdf = math.log(-math.expm1(-t)) if t < math.log(2) else math.log1p(-math.exp(-t))
    return -math.expm1(N * log_cdf)


def hypo_sample(N: int, rng: np.random.Generator) -> float:
    if N < 0:
        raise ValueError("N must be nonnegative")
    return float(sum(rng.exponential(1 / k) for k in range(1, N + 1)))


def trajectories_csv(trajs: Sequence[Trajectory]) -> str:
    """``time,x,y`` rows; each trajectory starts again at time 0."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "x", "y"])
    for tr in trajs:
        for t, x, y in zip(tr.times, tr.xs, tr.ys):
            w.writerow([repr(t), x, y])
    return buf.getvalue()


def manifest(seed: int, pair: UniformizedPair, horizon: float, trajs: Sequence[Trajectory]) -> str:
    absorbed = sum(1 for tr in trajs if absorption_time(tr) is not None)
    doc = {
        "seed": seed,
        "theta": frac_str(pair.theta),
        "horizon": horizon,
        "counts": {
            "trajectories": len(trajs),
            "events": sum(len(tr.times) for tr in trajs),
            "absorbed": absorbed,
        },
    }
    return json.dumps(doc, indent=2) + "\n"
