"""Command-line entry point: ``intertwine <command> [options]``.

Exit codes: 0 success or certified, 1 certified negative (a witness was
found), 2 usage error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import convergence, coupling, feasibility, generators, kernels, selftest
from .kernels import frac_str
from .linalg import is_zero
from .polyalg import ValueVector, hermite, krawtchouk, phi, phi_tilde

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
MAX_N = 10


class UsageError(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _vec(v: ValueVector) -> list[str]:
    return [frac_str(x) for x in v.values]


def parse_coeffs(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(s.strip()) for s in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse coefficient list {text!r}") from None


def parse_tgrid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive, tolerant to round-off) or a comma list."""
    if ":" in text:
        try:
            start, stop, step = (float(s) for s in text.split(":"))
        except ValueError:
            raise UsageError(f"bad time grid {text!r}") from None
        if step <= 0 or stop < start:
            raise UsageError("time grid needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + k * step, 12) for k in range(n + 1)]
    try:
        ts = [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"bad time grid {text!r}") from None
    if any(t < 0 for t in ts):
        raise UsageError("times must be nonnegative")
    return ts


def _check_N(N: int, cap: int = MAX_N) -> None:
    if N < 0:
        raise UsageError("N must be nonnegative")
    if N > cap:
        raise UsageError(f"N={N} exceeds the supported size {cap}")


# ----------------------------------------------------------------- spectra

def cmd_spectra(args) -> tuple[int, str]:
    _check_N(args.N)
    N, fam = args.N, args.family
    pairs = []
    if fam == "ou":
        for n in range(N + 1):
            h = hermite(n)
            res = generators.ou_apply(h) + h * n
            pairs.append({"n": n, "eigenvalue": -n, "vector": [frac_str(c) for c in h.coeffs], "residualZero": res.is_zero()})
    else:
        gen = {"ehrenfest": generators.ehrenfest, "yule": generators.yule, "reverse-yule": generators.reverse_yule}[fam](N)
        for n in range(N + 1):
            if fam == "ehrenfest":
                v = krawtchouk(N, n)
            elif fam == "yule":
                v = phi(n, N + 1)
            else:
                v = phi_tilde(n, N) if n else ValueVector(-N, (Fraction(1),) * (N + 1))
            res = generators.check_eigen(gen, v, n)
            pairs.append({"n": n, "eigenvalue": -n, "vector": _vec(v), "residualZero": res.is_zero()})
    ok = all(p["residualZero"] for p in pairs)
    doc = {"config": {"command": "spectra", "family": fam, "N": N}, "certified": ok, "eigenpairs": pairs}
    return (EXIT_OK if ok else EXIT_INTERNAL), _dump(doc)


# ------------------------------------------------------------------ verify

def _parse_generator(text: str) -> generators.FiniteGenerator:
    try:
        name, n = text.split(":")
        n = int(n)
    except ValueError:
        raise UsageError(f"bad generator spec {text!r}, expected family:N") from None
    makers = {"ehrenfest": generators.ehrenfest, "yule": generators.yule, "reverse-yule": generators.reverse_yule}
    if name not in makers:
        raise UsageError(f"unknown generator family {name!r}")
    _check_N(n, 11)
    return makers[name](n)


def cmd_verify(args) -> tuple[int, str]:
    config = {"command": "verify"}
    if args.polytope:
        parts = args.polytope.split(",")
        if len(parts) != 2:
            raise UsageError("--polytope expects A,B")
        a, b = (_parse_generator(p) for p in parts)
        config["polytope"] = args.polytope
        poly = kernels.kernel_polytope(a, b)
        doc = {
            "config": config,
            "summary": poly.summary(),
            "feasible": poly.feasible,
            "nontrivial": poly.nontrivial,
            "method": poly.method,
            "dimension": poly.dimension,
            "unique": poly.unique.to_json() if poly.unique else None,
            "witness": poly.witness.to_json() if poly.witness else None,
        }
        return EXIT_OK, _dump(doc)
    if not args.pair:
        raise UsageError("verify needs --pair or --polytope")
    config["pair"] = args.pair
    if args.N is None:
        raise UsageError("--N is required")
    _check_N(args.N)
    N = args.N
    if args.pair in ("ehrenfest-ehrenfest", "yule-ehrenfest"):
        M = N if args.M is None else args.M
        if not 0 <= M <= N:
            raise UsageError("need 0 <= M <= N")
        config.update(M=M, N=N)
        if args.pair == "ehrenfest-ehrenfest":
            res = kernels.verify_finite_intertwining(generators.ehrenfest(M), kernels.lambda_chain(M, N), generators.ehrenfest(N))
        else:
            res = kernels.verify_finite_intertwining(generators.yule(M), kernels.lambda_hat_chain(M, N), generators.ehrenfest(N))
        ok = is_zero(res)
        doc = {"config": config, "certified": ok, "residual": [[frac_str(v) for v in row] for row in res]}
        return (EXIT_OK if ok else EXIT_NEGATIVE), _dump(doc)
    if args.pair == "yule-ou":
        if args.a is None:
            raise UsageError("--a is required for yule-ou")
        a = parse_coeffs(args.a)
        try:
            a = feasibility.coeff_vector(a, N)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        config.update(N=N, a=[frac_str(v) for v in a])
        cert = kernels.verify_ou_intertwining(generators.yule(N), kernels.lambda_a(N, a), max(N, 1) + 4)
        markov = feasibility.check_membership_A(N, a)
        doc = {
            "config": config,
            "certified": cert.passed,
            "markov": markov.member,
            "residualFailures": cert.failures(),
            "feasibility": markov.to_json(),
        }
        if not cert.passed:
            return EXIT_INTERNAL, _dump(doc)
        return (EXIT_OK if markov.member else EXIT_NEGATIVE), _dump(doc)
    raise UsageError(f"unknown pair {args.pair!r}")


# ---------------------------------------------------------------- feasible

def cmd_feasible(args) -> tuple[int, str]:
    _check_N(args.N)
    config = {"command": "feasible", "N": args.N, "reverse": args.reverse}
    if args.max_a2:
        if args.N < 2:
            raise UsageError("--max-a2 needs N >= 2")
        config["maxA2"] = True
        return EXIT_OK, _dump({"config": config, "maxA2": frac_str(feasibility.max_a2(args.N))})
    if args.a is None:
        raise UsageError("feasible needs --a or --max-a2")
    try:
        a = feasibility.coeff_vector(parse_coeffs(args.a), args.N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config["a"] = [frac_str(v) for v in a]
    check = feasibility.check_membership_reverse if args.reverse else feasibility.check_membership_A
    report = check(args.N, a)
    doc = {"config": config, **report.to_json()}
    return (EXIT_OK if report.member else EXIT_NEGATIVE), _dump(doc)


# ------------------------------------------------------------------ couple

def couple_outputs(N: int, samples: int, horizon: float, seed: int) -> dict[str, str]:
    """Stats JSON, trajectory CSV and manifest of a ``(D_N, Λ̂_N, L_N)`` run."""
    pair = coupling.build_coupling(generators.yule(N), kernels.lambda_hat(N), generators.ehrenfest(N))
    m0 = [0] * N + [1]
    trajs = coupling.simulate_many(pair, m0, horizon, samples, seed=seed)
    taus = [t for t in (coupling.absorption_time(tr) for tr in trajs) if t is not None]
    hist_edges = np.linspace(0.0, horizon, 21)
    hist = np.histogram(taus, bins=hist_edges)[0] if taus else np.zeros(20, dtype=int)
    stats_doc = {
        "config": {"command": "couple", "N": N, "samples": samples, "horizon": horizon, "seed": seed},
        "theta": frac_str(pair.theta),
        "absorbed": len(taus),
        "meanTau": float(np.mean(taus)) if taus else None,
        "tauHistogram": {"edges": [float(e) for e in hist_edges], "counts": [int(c) for c in hist]},
    }
    if N >= 1 and len(taus) >= 2:
        ks, p = selftest.tau_ks(trajs, N, horizon)
        stats_doc["ks"] = {"statistic": ks, "pvalue": p, "conditionedOnTauBelowHorizon": True}
    if N >= 1 and samples >= 1000:
        times = tuple(t for t in (0.5, 1.0, 2.0) if t <= horizon)
        try:
            stats_doc["chiSquare"] = selftest.coupling_tests(trajs, N, pair, times)
        except ValueError:
            stats_doc["chiSquare"] = None
    return {
        "stats.json": _dump(stats_doc),
        "trajectories.csv": coupling.trajectories_csv(trajs),
        "manifest.json": coupling.manifest(seed, pair, horizon, trajs),
    }


def cmd_couple(args) -> tuple[int, str]:
    _check_N(args.N)
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if args.horizon < 0:
        raise UsageError("--horizon must be nonnegative")
    if not 0 <= args.seed < 2 ** 64:
        raise UsageError("--seed must fit in 64 bits")
    outs = couple_outputs(args.N, args.samples, args.horizon, args.seed)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        for name, text in outs.items():
            (d / name).write_text(text, encoding="utf-8", newline="\n")
    return EXIT_OK, outs["stats.json"]


# ---------------------------------------------------------------- converge

def cmd_converge(args) -> tuple[int, str]:
    _check_N(args.N)
    N = args.N
    tgrid = parse_tgrid(args.tgrid)
    m0 = [0] * N + [1]
    if args.hat:
        k = kernels.lambda_hat(N)
    else:
        if args.a is None:
            raise UsageError("converge needs --a or --hat")
        try:
            a = feasibility.coeff_vector(parse_coeffs(args.a), N)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report = feasibility.check_membership_A(N, a)
        if not report.member:
            sys.stderr.write("error: infeasible coefficients: " + json.dumps(report.to_json()) + "\n")
            return EXIT_NEGATIVE, ""
        k = kernels.lambda_a(N, a)
    curve = convergence.bound_curve(N, m0, tgrid, k)
    bad = curve.violations()
    if bad:
        sys.stderr.write(f"inequality chain violated at rows {bad}\n")
        return EXIT_INTERNAL, curve.to_csv()
    return EXIT_OK, curve.to_csv()


# ---------------------------------------------------------------- selftest

def cmd_selftest(args) -> tuple[int, str]:
    lines = []
    results = selftest.run_all(echo=None)
    for r in results:
        lines.append(r.line())
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return (EXIT_OK if ok else EXIT_INTERNAL), "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intertwine", description="Exact intertwinings of Ehrenfest, Yule and OU generators.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectra", help="certified eigenpairs of a generator family")
    s.add_argument("--family", required=True, choices=["ehrenfest", "yule", "reverse-yule", "ou"])
    s.add_argument("--N", type=int, required=True)
    s.set_defaults(func=cmd_spectra)

    s = sub.add_parser("verify", help="certify an intertwining or analyse a kernel polytope")
    s.add_argument("--pair", choices=["ehrenfest-ehrenfest", "yule-ehrenfest", "yule-ou"])
    s.add_argument("--polytope", help="A,B with A and B of the form family:N")
    s.add_argument("--M", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--a", help="comma-separated rationals, a_0 = 1")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("feasible", help="membership of a coefficient vector, or the largest a_2")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--a")
    s.add_argument("--max-a2", action="store_true")
    s.add_argument("--reverse", action="store_true", help="reverse-Yule region instead")
    s.set_defaults(func=cmd_feasible)

    s = sub.add_parser("couple", help="simulate the (D_N, Λ̂_N, L_N) coupling")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--horizon", type=float, default=10.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="directory for trajectories.csv, manifest.json and stats.json")
    s.set_defaults(func=cmd_couple)

    s = sub.add_parser("converge", help="separation, total variation and bound along a time grid (CSV)")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--a")
    s.add_argument("--hat", action="store_true", help="Ehrenfest target through Λ̂_N")
    s.add_argument("--tgrid", default="0.1:5:0.1")
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("selftest", help="run the full certificate suite")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        code, text = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (AssertionError, ArithmeticError) as exc:
        sys.stderr.write(f"internal violation: {exc}\n")
        return EXIT_INTERNAL
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
