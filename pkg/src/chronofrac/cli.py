"""Command line front end: solve, threshold, sweep and verify."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .fractional import gamma_fn, verify_composition
from .oracles import (
    OracleCase,
    closed_form_power_integral,
    constant_f_solution,
    extension_gap,
    load_suite,
)
from .solver import (
    ProblemSpec,
    apply_K,
    contraction_terms,
    picard_solve,
    problem_from_json,
    sup_bound,
    threshold_from_constants,
    uniqueness_threshold,
)
from .conductivity import ClampedAffine, model_from_json
from .timescale import GridFunction, TimeScale, build_grid

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY = 2
EXIT_NO_CONVERGENCE = 3


class ConfigError(Exception):
    """Bad usage, unreadable config, or violated problem invariants."""


class _Parser(argparse.ArgumentParser):
    # route usage errors through the single exit-code policy
    def error(self, message):
        raise ConfigError(message)


def _fmt(x: float) -> str:
    # repr of a float round-trips exactly, keeping CSV output lossless
    return repr(float(x))


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _load_problem(path: str) -> ProblemSpec:
    try:
        return problem_from_json(_load_json(path))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_report(out: Path, report) -> None:
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n")
    rows = ["t,u"]
    rows += [
        f"{_fmt(t)},{_fmt(u)}"
        for t, u in zip(report.solution.grid.nodes, report.solution.values)
    ]
    (out / "solution.csv").write_text("\n".join(rows) + "\n")
    rows = ["k,d_k"]
    rows += [f"{k},{_fmt(d)}" for k, d in enumerate(report.trace, start=1)]
    (out / "trace.csv").write_text("\n".join(rows) + "\n")


def cmd_solve(args) -> int:
    spec = _load_problem(args.config)
    out = _out_dir(args)
    report = picard_solve(spec)
    _write_report(out, report)
    status = "converged" if report.converged else "did not converge"
    print(
        f"solve: {status} in {report.iterations} iterations, "
        f"residual {report.residual:.3e}, q {report.q:.6g}"
    )
    if args.strict and not report.converged:
        print("solve: non-convergence is fatal under --strict", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_threshold(args) -> int:
    spec = _load_problem(args.config)
    out = _out_dir(args)
    c1, c2, lip = spec.model.constants()
    t1, t2 = contraction_terms(spec.alpha, spec.span, c1, c2, lip, spec.lam)
    lam_star = uniqueness_threshold(spec)
    data = {
        "lambda_star": lam_star if math.isfinite(lam_star) else "inf",
        "q_at_lambda": t1 + t2,
        "terms": {"term1": t1, "term2": t2},
    }
    (out / "threshold.json").write_text(json.dumps(data, indent=2) + "\n")
    shown = "inf" if not math.isfinite(lam_star) else f"{lam_star:.12g}"
    print(f"threshold: lambda_star {shown}, q at lambda {t1 + t2:.12g}")
    return EXIT_OK


def _sweep_range(args, config: dict) -> tuple[float, float, float]:
    section = config.get("sweep", {}) if isinstance(config, dict) else {}
    if not isinstance(section, dict):
        raise ConfigError("field 'sweep' must be an object")

    def pick(flag_value, key):
        if flag_value is not None:
            return flag_value
        return section.get(key)

    lam_min = pick(args.lambda_min, "lambda_min")
    lam_max = pick(args.lambda_max, "lambda_max")
    step = pick(args.lambda_step, "lambda_step")
    if lam_min is None or lam_max is None or step is None:
        raise ConfigError(
            "sweep needs lambda_min, lambda_max and lambda_step "
            "(flags --lambda-min/--lambda-max/--lambda-step or a 'sweep' config section)"
        )
    try:
        lam_min, lam_max, step = float(lam_min), float(lam_max), float(step)
    except (TypeError, ValueError) as exc:
        raise ConfigError("sweep bounds and step must be numbers") from exc
    if step <= 0:
        raise ConfigError("field 'lambda_step' must be positive")
    if lam_max < lam_min:
        raise ConfigError("field 'lambda_max' must be at least lambda_min")
    if lam_min < 0:
        raise ConfigError("field 'lambda_min' must be nonnegative")
    return lam_min, lam_max, step


def _worker_count() -> int:
    raw = os.environ.get("CHRONOFRAC_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError("CHRONOFRAC_THREADS must be a positive integer") from exc
    if n < 1:
        raise ConfigError("CHRONOFRAC_THREADS must be a positive integer")
    return n


def cmd_sweep(args) -> int:
    config = _load_json(args.config)
    try:
        spec = problem_from_json(config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    lam_min, lam_max, step = _sweep_range(args, config)
    out = _out_dir(args)

    count = int(math.floor((lam_max - lam_min) / step + 1e-9)) + 1
    lams = [lam_min + k * step for k in range(count)]

    def run(lam: float):
        rep = picard_solve(replace(spec, lam=lam))
        sup = max(abs(v) for v in rep.solution.values)
        return (lam, rep.iterations, rep.residual, rep.q, rep.converged, sup)

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        results = list(pool.map(run, lams))

    rows = ["lambda,iterations,residual,q,converged,sup_norm"]
    for lam, iters, residual, q, converged, sup in results:
        flag = "true" if converged else "false"
        rows.append(
            f"{_fmt(lam)},{iters},{_fmt(residual)},{_fmt(q)},{flag},{_fmt(sup)}"
        )
    (out / "sweep.csv").write_text("\n".join(rows) + "\n")

    bad = sum(1 for r in results if not r[4])
    print(f"sweep: {len(results)} runs, {bad} without convergence")
    if args.strict and bad:
        print("sweep: non-convergence is fatal under --strict", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


# -- verify ----------------------------------------------------------------


def _case_observed(case: OracleCase) -> float:
    """Evaluate the production-path quantity a case pins down."""
    p = case.inputs
    kind = p.get("kind")
    params = p.get("params", {})
    if kind == "gamma":
        return gamma_fn(float(params["x"]))
    if kind == "power_integral":
        from .fractional import frac_integral

        ts = TimeScale.interval(0.0, float(params["T"]))
        grid = build_grid(ts, float(params["h_max"]))
        beta = float(params["beta"])
        g = GridFunction.sample(grid, lambda s: 1.0 if beta == 0.0 else s**beta)
        return frac_integral(g, float(params["alpha"]), float(params["t"]))
    if kind == "discrete_integral":
        from .fractional import frac_integral

        ts = TimeScale.from_points(params["points"])
        grid = build_grid(ts, 1.0)
        g = GridFunction(grid, tuple(float(v) for v in params["values"]))
        return frac_integral(g, float(params["alpha"]), float(params["t"]))
    if kind == "apply_k":
        spec = problem_from_json(params["problem"])
        ku = apply_K(spec, GridFunction.zeros(spec.grid))
        return ku.value_at(float(params["t"]))
    if kind == "threshold":
        return threshold_from_constants(
            float(params["alpha"]),
            float(params["T"]),
            float(params["c1"]),
            float(params["c2"]),
            float(params["lipschitz"]),
        )
    if kind == "sup_bound":
        spec = ProblemSpec(
            timescale=TimeScale.interval(0.0, float(params["T"])),
            alpha=float(params["alpha"]),
            lam=float(params["lambda"]),
            model=ClampedAffine(
                base=float(params["c1"]),
                slope=1.0,
                lo=float(params["c1"]),
                hi=float(params["c2"]),
            ),
        )
        return sup_bound(spec)
    if kind == "constant_solution":
        spec = problem_from_json(params["problem"])
        rep = picard_solve(spec)
        c = spec.model.constants()[0]
        worst = 0.0
        for t, u in zip(spec.grid.nodes, rep.solution.values):
            exact = constant_f_solution(c, spec.lam, spec.alpha, spec.span, t - spec.timescale.t0)
            worst = max(worst, abs(u - exact))
        return worst
    if kind == "power_closed_form":
        return closed_form_power_integral(
            float(params["alpha"]), float(params["beta"]), float(params["t"])
        )
    if kind == "extension_inequality":
        ts = TimeScale.from_json(params["time_scale"])
        grid = build_grid(ts, float(params.get("h_max", 1.0)))
        g = GridFunction.sample(grid, lambda s: s)
        # violation amount; zero when the bound holds
        return max(0.0, -extension_gap(g))
    raise ConfigError(f"case '{case.name}' has unknown kind '{kind}'")


def _run_cases(cases: list[OracleCase]) -> tuple[list[str], int]:
    lines = []
    failures = 0
    for case in cases:
        try:
            observed = _case_observed(case)
        except (ValueError, KeyError, TypeError) as exc:
            failures += 1
            lines.append(f"FAIL {case.name}: could not evaluate ({exc})")
            continue
        err = abs(observed - case.expected)
        if err <= case.tolerance:
            lines.append(
                f"ok   {case.name}: |obs-exp|={err:.3e} <= tol={case.tolerance:.1e}"
            )
        else:
            failures += 1
            lines.append(
                f"FAIL {case.name}: observed={observed!r} expected={case.expected!r} "
                f"|obs-exp|={err:.3e} > tol={case.tolerance:.1e}"
            )
    return lines, failures


def _refinement_study() -> tuple[list[str], int]:
    """Composition residuals must shrink as the grid refines."""
    ts = TimeScale.interval(0.0, 1.0)
    errs_di = []
    errs_id = []
    for h in (1.0 / 64, 1.0 / 128, 1.0 / 256):
        g = GridFunction.sample(build_grid(ts, h), lambda s: s)
        rep = verify_composition(g, 0.5)
        errs_di.append(rep.err_di)
        errs_id.append(rep.err_id)
    lines = []
    failures = 0
    for label, errs in (("err_DI", errs_di), ("err_ID", errs_id)):
        decreasing = all(b < a for a, b in zip(errs, errs[1:]))
        shown = ", ".join(f"{e:.3e}" for e in errs)
        if decreasing:
            lines.append(f"ok   composition_refinement_{label}: {shown}")
        else:
            failures += 1
            lines.append(f"FAIL composition_refinement_{label}: not decreasing: {shown}")
    return lines, failures


def _default_cases_dir() -> Path:
    return Path(str(resources.files("chronofrac") / "cases"))


def cmd_verify(args) -> int:
    cases_dir = Path(args.cases) if args.cases else _default_cases_dir()
    if not cases_dir.is_dir():
        raise ConfigError(f"cases directory {cases_dir} does not exist")
    cases: list[OracleCase] = []
    for path in sorted(cases_dir.glob("*.json")):
        try:
            cases.extend(load_suite(path))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    lines, failures = _run_cases(cases)
    ref_lines, ref_failures = _refinement_study()
    lines += ref_lines
    failures += ref_failures
    for line in lines:
        print(line)
    total = len(cases) + 2
    print(f"verify: {len(cases)} cases, {total} checks, {failures} failures")
    if args.out:
        out = _out_dir(args)
        (out / "verify.json").write_text(
            json.dumps({"checks": total, "failures": failures, "lines": lines}, indent=2)
            + "\n"
        )
    return EXIT_VERIFY if failures else EXIT_OK


# -- entry point -----------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="chronofrac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="problem config JSON")
        p.add_argument("--strict", action="store_true", help="non-convergence is fatal")

    p = sub.add_parser("solve", help="run Picard iteration, write report and CSVs")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("threshold", help="write the uniqueness threshold report")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sweep", help="solve over a lambda range, write sweep.csv")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--lambda-step", type=float, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the frozen oracle suites")
    p.add_argument("--cases", default=None, help="directory of case suites")
    p.add_argument("--out", default=None, help="optional directory for verify.json")
    p.add_argument("--strict", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
