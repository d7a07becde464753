"""Certificate suite: each check recomputes one claim end to end and reports pass/fail."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import stats
from scipy.special import roots_legendre

from . import coupling, convergence, feasibility, generators, kernels
from .linalg import is_zero
from .polyalg import X, hermite, krawtchouk, phi, phi_tilde, ValueVector

SIGNIFICANCE = 0.001


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    budget: float | None = None

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        over = ""
        if self.budget is not None:
            over = f" ({self.seconds:.2f}s / {self.budget:g}s)"
        return f"[{flag}] {self.name}: {self.detail}{over}"


def _timed(name: str, budget: float | None, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        ok = False
        detail += "; over time budget"
    return CheckResult(name, ok, detail, dt, budget)


# ---------------------------------------------------------------- spectra

def spectral_failures(max_n: int = 10) -> list[str]:
    bad = []
    for N in range(max_n + 1):
        L, D, R = generators.ehrenfest(N), generators.yule(N), generators.reverse_yule(N)
        for n in range(N + 1):
            if not generators.check_eigen(L, krawtchouk(N, n), n).is_zero():
                bad.append(f"ehrenfest N={N} n={n}")
            if not generators.check_eigen(D, phi(n, N + 1), n).is_zero():
                bad.append(f"yule N={N} n={n}")
            v = ValueVector(-N, (Fraction(1),) * (N + 1)) if n == 0 else phi_tilde(n, N)
            if not generators.check_eigen(R, v, n).is_zero():
                bad.append(f"reverse-yule N={N} n={n}")
    for n in range(max_n + 1):
        if generators.ou_apply(hermite(n)) != hermite(n) * (-n):
            bad.append(f"ou n={n}")
    return bad


def check_spectra() -> CheckResult:
    def run():
        bad = spectral_failures(10)
        return not bad, "all eigenpairs have zero residual" if not bad else f"nonzero residuals: {bad[:5]}"
    return _timed("1 spectral certificates", 5.0, run)


# ----------------------------------------------------------- intertwinings

def intertwining_failures(max_n: int = 10, max_eig: int = 8) -> list[str]:
    bad = []
    for N in range(max_n + 1):
        LN = generators.ehrenfest(N)
        for M in range(N + 1):
            if not is_zero(kernels.verify_finite_intertwining(generators.ehrenfest(M), kernels.lambda_chain(M, N), LN)):
                bad.append(f"L_{M} Λ_{M},{N}")
            if not is_zero(kernels.verify_finite_intertwining(generators.yule(M), kernels.lambda_hat_chain(M, N), LN)):
                bad.append(f"D_{M} Λ̂_{M},{N}")
    for N in range(max_eig + 1):
        step, hat = kernels.lambda_step(N), kernels.lambda_hat(N)
        for n in range(N + 2):
            expect = krawtchouk(N, n) if n <= N else ValueVector.zeros(0, N + 1)
            if step.apply(krawtchouk(N + 1, n)) != expect:
                bad.append(f"Λ_{N}[K_{N + 1},{n}]")
        for n in range(N + 1):
            expect = phi(n, N + 1).scale(Fraction(math.factorial(n), 2 ** n))
            if hat.apply(krawtchouk(N, n)) != expect:
                bad.append(f"Λ̂_{N}[K_{N},{n}]")
    return bad


def check_intertwinings() -> CheckResult:
    def run():
        bad = intertwining_failures()
        return not bad, "all residuals zero" if not bad else f"failures: {bad[:5]}"
    return _timed("2 intertwining certificates", 10.0, run)


# ------------------------------------------------------------ feasibility

def check_max_a2() -> CheckResult:
    def run():
        v2, v3 = feasibility.max_a2(2), feasibility.max_a2(3)
        ok = v2 == 2 and v3 == Fraction(2, 3)
        return ok, f"max_a2(2) = {v2}, max_a2(3) = {v3}"
    return _timed("3 feasibility endpoints", 1.0, run)


def random_nontrivial(rng: np.random.Generator, N: int) -> tuple[Fraction, ...]:
    """Random rational coefficients with ``a_0 = 1`` and some ``a_n != 0``, ``n >= 1``."""
    while True:
        a = [Fraction(1)]
        for _ in range(N):
            if rng.random() < 0.3:
                a.append(Fraction(0))
            else:
                a.append(Fraction(int(rng.integers(-30, 31)), int(rng.integers(1, 11))))
        if any(a[1:]):
            return tuple(a)


def triviality_failures(samples: int = 200, seed: int = 20240601) -> list[str]:
    bad = []
    for N in range(5):
        for M in range(5):
            poly = kernels.kernel_polytope(generators.ehrenfest(N), generators.yule(M))
            delta0 = (Fraction(1),) + (Fraction(0),) * M
            u = poly.unique
            if u is None or any(row != delta0 for row in u.entries):
                bad.append(f"polytope(L_{N}, D_{M}): {poly.summary()}")
    rng = np.random.default_rng(seed)
    for label, finder in (("ehrenfest", feasibility.ehrenfest_ou_witness), ("reverse", feasibility.reverse_witness)):
        for _ in range(samples):
            N = int(rng.integers(1, 7))
            a = random_nontrivial(rng, N)
            try:
                w = finder(N, a)
            except Exception as exc:  # any failure to produce a witness counts
                bad.append(f"{label} N={N} a={a}: {exc}")
                continue
            row = kernels.ehrenfest_density_row(a, w.y) if label == "ehrenfest" else kernels.lambda_a_reverse_row(a, w.y)
            if not (w.value < 0 and row(w.x0) == w.value):
                bad.append(f"{label} N={N} a={a}: bad witness {w}")
    return bad


def check_triviality() -> CheckResult:
    def run():
        bad = triviality_failures()
        return not bad, "25 polytopes δ_0-only, 400 witnesses found" if not bad else f"failures: {bad[:3]}"
    return _timed("4 triviality certificates", None, run)


def square_density_residual() -> tuple[bool, Fraction]:
    """Kernel with rows ``1`` and ``h_1**2`` against the two-state Yule chain."""
    k = kernels.density_kernel([X ** 0, X * X])
    cert = kernels.verify_ou_intertwining(generators.yule(1), k, 4)
    return cert.passed, cert.images[2][1]


def check_square_density() -> CheckResult:
    def run():
        passed, img = square_density_residual()
        return (not passed and img == 2), f"certificate fails as expected, Λ[h_2](1) = {img}"
    return _timed("5 square-density kernel rejected", None, run)


# ---------------------------------------------------------- hypoexponential

_GL_NODES, _GL_WEIGHTS = roots_legendre(40)


def _density_by_convolution(k: int, t: np.ndarray) -> np.ndarray:
    """Density of ``E(1) + ... + E(k)`` at ``t`` by nested Gauss-Legendre convolution."""
    if k == 1:
        return np.exp(-t)
    u = (_GL_NODES + 1) / 2
    s = t[..., None] * u
    inner = _density_by_convolution(k - 1, s) * k * np.exp(-k * (t[..., None] - s))
    return (t / 2) * (inner @ _GL_WEIGHTS)


def survival_by_convolution(N: int, t: np.ndarray) -> np.ndarray:
    """``P[T_N > t]`` from ``P[T_{N-1} > t] + ∫_0^t f_{N-1}(s) e^{-N(t-s)} ds``."""
    t = np.asarray(t, dtype=float)
    if N == 0:
        return np.zeros_like(t)
    surv = np.exp(-t)
    u = (_GL_NODES + 1) / 2
    for k in range(2, N + 1):
        s = t[..., None] * u
        tail = _density_by_convolution(k - 1, s) * np.exp(-k * (t[..., None] - s))
        surv = surv + (t / 2) * (tail @ _GL_WEIGHTS)
    return surv


def hypo_grid() -> np.ndarray:
    return np.linspace(0.1, 5.0, 50)


def hypo_errors(samples: int = 10 ** 6, seed: int = 11) -> tuple[float, float]:
    """Largest deviation from the convolution oracle, and largest Monte Carlo z-score."""
    ts = hypo_grid()
    worst_abs, worst_z = 0.0, 0.0
    rng = np.random.default_rng(seed)
    for N in range(1, 6):
        closed = np.array([coupling.hypo_survival(N, t) for t in ts])
        worst_abs = max(worst_abs, float(np.max(np.abs(closed - survival_by_convolution(N, ts)))))
        sums = sum(rng.exponential(1 / k, size=samples) for k in range(1, N + 1))
        sums.sort()
        emp = 1 - np.searchsorted(sums, ts, side="right") / samples
        se = np.sqrt(closed * (1 - closed) / samples)
        worst_z = max(worst_z, float(np.max(np.abs(emp - closed) / se)))
    return worst_abs, worst_z


def check_hypo() -> CheckResult:
    def run():
        err, z = hypo_errors()
        return err <= 1e-10 and z <= 3, f"oracle error {err:.2e}, max Monte Carlo |z| = {z:.2f}"
    return _timed("6 hypoexponential law", None, run)


# ---------------------------------------------------------------- coupling

def _pooled_chisquare(observed, expected_probs) -> float:
    """Chi-square p-value after pooling cells with expected count below 5."""
    observed = np.asarray(observed, dtype=float)
    exp = np.asarray(expected_probs, dtype=float) * observed.sum()
    order = np.argsort(exp)
    obs_p, exp_p = [], []
    acc_o = acc_e = 0.0
    for i in order:
        acc_o += observed[i]
        acc_e += exp[i]
        if acc_e >= 5:
            obs_p.append(acc_o)
            exp_p.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        if obs_p:
            obs_p[-1] += acc_o
            exp_p[-1] += acc_e
        else:
            obs_p.append(acc_o)
            exp_p.append(acc_e)
    if len(obs_p) < 2:
        return 1.0
    return float(stats.chisquare(obs_p, exp_p).pvalue)


def coupling_tests(trajs, N: int, pair, times=(0.5, 1.0, 2.0), min_bucket: int = 500) -> dict:
    """p-values for the marginal, conditional and strong-stationarity contracts."""
    link = pair.link
    m0 = [0] * N + [1]
    out = {}
    for t in times:
        xs = np.array([tr.state_at(t).x for tr in trajs])
        ys = np.array([tr.state_at(t).y for tr in trajs])
        law = convergence.ehrenfest_evolve(N, m0, t)
        out[f"marginal t={t:g}"] = _pooled_chisquare(np.bincount(xs, minlength=N + 1), law)
        for y in range(N + 1):
            sel = xs[ys == y]
            if len(sel) >= min_bucket:
                row = [float(v) for v in link.row(y)]
                out[f"conditional t={t:g} y={y}"] = _pooled_chisquare(np.bincount(sel, minlength=N + 1), row)
    taus, xtau = [], []
    for tr in trajs:
        tau = coupling.absorption_time(tr)
        if tau is not None:
            taus.append(tau)
            xtau.append(tr.state_at(tau).x)
    taus, xtau = np.array(taus), np.array(xtau)
    pi = [float(v) for v in generators.binomial_measure(N).values]
    out["X_tau stationary"] = _pooled_chisquare(np.bincount(xtau, minlength=N + 1), pi)
    cuts = np.quantile(taus, [0.25, 0.5, 0.75])
    quart = np.searchsorted(cuts, taus, side="right")
    table = np.array([np.bincount(xtau[quart == q], minlength=N + 1) for q in range(4)])
    table = table[:, table.sum(axis=0) > 0]
    out["X_tau independent of tau"] = float(stats.chi2_contingency(table).pvalue)
    return out


def tau_ks(trajs, N: int, horizon: float) -> tuple[float, float]:
    """KS test of absorption times against the hypoexponential law, conditioned on ``tau <= horizon``."""
    taus = np.array([t for t in (coupling.absorption_time(tr) for tr in trajs) if t is not None])
    norm = 1 - coupling.hypo_survival(N, horizon)

    def cdf(x):
        x = np.atleast_1d(x)
        return np.array([(1 - coupling.hypo_survival(N, min(max(v, 0.0), horizon))) / norm for v in x])

    res = stats.kstest(taus, cdf)
    return float(res.statistic), float(res.pvalue)


def check_coupling(samples: int = 100_000, seed: int = 7) -> CheckResult:
    def run():
        N, horizon = 3, 8.0
        pair = coupling.build_coupling(generators.yule(N), kernels.lambda_hat(N), generators.ehrenfest(N))
        trajs = coupling.simulate_many(pair, [0] * N + [1], horizon, samples, seed=seed)
        pvals = coupling_tests(trajs, N, pair)
        worst = min(pvals, key=pvals.get)
        ok = all(p > SIGNIFICANCE for p in pvals.values())
        return ok, f"{len(pvals)} chi-square tests, smallest p = {pvals[worst]:.3g} ({worst})"
    return _timed("7 coupling contract", 60.0, run)


# ------------------------------------------------------------- convergence

def convergence_report() -> tuple[list[str], float]:
    grid = [0.1 * k for k in range(1, 51)]
    bad = []
    cases = [
        ("N=2 a=(1,0,2)", 2, kernels.lambda_a(2, (1, 0, 2))),
        ("N=3 a=(1,0,2/3,0)", 3, kernels.lambda_a(3, (1, 0, Fraction(2, 3), 0))),
    ] + [(f"Ehrenfest N={N}", N, kernels.lambda_hat(N)) for N in range(1, 7)]
    sep_err = 0.0
    for label, N, k in cases:
        curve = convergence.bound_curve(N, [0] * N + [1], grid, k)
        closed = [coupling.hypo_survival(N, t) for t in grid]
        if curve.violations() or any(abs(b - c) > 1e-12 for b, c in zip(curve.bound, closed)):
            bad.append(label)
        if N == 2 and label.startswith("N=2"):
            sep_err = max(abs(s - math.exp(-2 * t)) for t, s in zip(grid, curve.separation))
    return bad, sep_err


def check_convergence() -> CheckResult:
    def run():
        bad, err = convergence_report()
        ok = not bad and err <= 1e-9
        return ok, f"chain holds on all 8 curves, |sep - e^(-2t)| <= {err:.1e}" if ok else f"failures: {bad}, err {err:.1e}"
    return _timed("8 convergence bound chain", None, run)


# ------------------------------------------------------------- determinism

def check_determinism() -> CheckResult:
    def run():
        import os
        import tempfile

        from .cli import couple_outputs

        args = dict(N=3, samples=2000, horizon=6.0, seed=42)
        outs = []
        old = os.environ.get("WORKER_COUNT")
        try:
            for workers in ("1", "1", "2"):
                os.environ["WORKER_COUNT"] = workers
                outs.append(couple_outputs(**args))
        finally:
            if old is None:
                os.environ.pop("WORKER_COUNT", None)
            else:
                os.environ["WORKER_COUNT"] = old
        ok = outs[0] == outs[1] == outs[2]
        return ok, "identical bytes across runs and worker counts 1, 2" if ok else "outputs differ"
    return _timed("9 determinism", None, run)


CHECKS = [
    check_spectra,
    check_intertwinings,
    check_max_a2,
    check_triviality,
    check_square_density,
    check_hypo,
    check_coupling,
    check_convergence,
    check_determinism,
]


def run_all(echo=print) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        r = check()
        if echo:
            echo(r.line())
        results.append(r)
    return results
