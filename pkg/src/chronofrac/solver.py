"""Fixed-point machinery for the fractional nonlocal thermistor problem.

The solution operator sends a temperature profile ``u`` on a time scale to

    K(u)(t) = lam / gamma(2 a) * int_{t0}^{t} (t - s)**(2 a - 1) f(u(s)) ds
              ------------------------------------------------------------
                        ( delta integral of f(u) over [t0, T) )**2

with fractional exponent ``a`` in (0, 1/2), source multiplier ``lam`` and
conductivity model ``f``.  Solutions are fixed points of ``K``.  Because
``f`` is bounded into [c1, c2] and Lipschitz, ``K`` is Lipschitz on the
sampled profiles with an explicit constant that is linear in ``lam``;
below the reciprocal of that slope (the uniqueness threshold) Picard
iteration is a contraction and the computed solution comes with a priori
error and sup-norm bounds that this module also exposes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .conductivity import ConductivityModel, model_from_json
from .fractional import frac_integral_operator, gamma_fn
from .timescale import Grid, GridFunction, TimeScale, build_grid, delta_integral

__all__ = [
    "ProblemSpec",
    "SolveReport",
    "DiagnosticCheck",
    "ExistenceDiagnostics",
    "contraction_terms",
    "threshold_from_constants",
    "denominator",
    "apply_K",
    "contraction_constant",
    "uniqueness_threshold",
    "sup_bound",
    "equicontinuity_modulus",
    "picard_solve",
    "existence_diagnostics",
    "problem_from_json",
]

DEFAULT_CELLS = 512


@dataclass(frozen=True)
class ProblemSpec:
    """Full description of one thermistor problem instance.

    ``h_max`` defaults to the window length divided by 512.  ``theta`` is
    the damping weight of the Picard update ``(1 - theta) u + theta K(u)``;
    ``theta = 1`` is the undamped iteration.
    """

    timescale: TimeScale
    alpha: float
    lam: float
    model: ConductivityModel
    h_max: float | None = None
    tol: float = 1e-10
    max_iter: int = 200
    theta: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be an integer >= 1")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if self.h_max is None:
            object.__setattr__(self, "h_max", self.span / DEFAULT_CELLS)
        if not self.h_max > 0:
            raise ValueError("h_max must be positive")

    @property
    def span(self) -> float:
        """Window length ``T - t0``; the length entering every bound."""
        return self.timescale.T - self.timescale.t0

    @cached_property
    def grid(self) -> Grid:
        return build_grid(self.timescale, self.h_max)

    def to_json(self) -> dict:
        return {
            "time_scale": self.timescale.to_json(),
            "alpha": self.alpha,
            "lambda": self.lam,
            "conductivity": self.model.to_json(),
            "h_max": self.h_max,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "theta": self.theta,
        }


def problem_from_json(data: dict) -> ProblemSpec:
    """Build a ProblemSpec from parsed JSON, naming any offending field."""
    if not isinstance(data, dict):
        raise ValueError("problem config must be a JSON object")

    def need(key):
        if key not in data:
            raise ValueError(f"missing required field '{key}'")
        return data[key]

    def number(key, value):
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"field '{key}' must be a number") from exc

    ts = TimeScale.from_json(need("time_scale"))
    model = model_from_json(need("conductivity"))
    kwargs = {
        "timescale": ts,
        "alpha": number("alpha", need("alpha")),
        "lam": number("lambda", need("lambda")),
        "model": model,
    }
    for key, attr in (("h_max", "h_max"), ("tol", "tol"), ("theta", "theta")):
        if key in data and data[key] is not None:
            kwargs[attr] = number(key, data[key])
    if "max_iter" in data and data["max_iter"] is not None:
        try:
            kwargs["max_iter"] = int(data["max_iter"])
        except (TypeError, ValueError) as exc:
            raise ValueError("field 'max_iter' must be an integer") from exc
    return ProblemSpec(**kwargs)


# -- explicit constants ----------------------------------------------------


def contraction_terms(
    alpha: float,
    span: float,
    c1: float,
    c2: float,
    lipschitz: float,
    lam: float = 1.0,
) -> tuple[float, float]:
    """The two summands of the Lipschitz bound on the solution operator.

    The first comes from perturbing the numerator, the second from
    perturbing the squared denominator; both are linear in ``lam``.
    """
    g = gamma_fn(2.0 * alpha + 1.0)
    t1 = lam * span ** (2.0 * alpha) * lipschitz / ((c1 * span) ** 2 * g)
    t2 = (
        2.0
        * lam
        * c2**2
        * span ** (2.0 * (alpha + 1.0))
        * lipschitz
        / ((c1 * span) ** 4 * g)
    )
    return (t1, t2)


def threshold_from_constants(
    alpha: float, span: float, c1: float, c2: float, lipschitz: float
) -> float:
    """Largest source multiplier with a contractive solution operator.

    Infinite when the conductivity is flat (zero Lipschitz constant): the
    operator is then independent of ``u`` and any multiplier is fine.
    """
    slope = sum(contraction_terms(alpha, span, c1, c2, lipschitz, lam=1.0))
    if slope == 0.0:
        return math.inf
    return 1.0 / slope


def contraction_constant(spec: ProblemSpec) -> float:
    """Lipschitz constant of the solution operator at the problem's lambda."""
    c1, c2, lip = spec.model.constants()
    return sum(contraction_terms(spec.alpha, spec.span, c1, c2, lip, spec.lam))


def uniqueness_threshold(spec: ProblemSpec) -> float:
    """The multiplier below which the fixed point is provably unique."""
    c1, c2, lip = spec.model.constants()
    return threshold_from_constants(spec.alpha, spec.span, c1, c2, lip)


def sup_bound(spec: ProblemSpec) -> float:
    """A priori sup-norm bound on ``K(u)``, uniform over profiles ``u``."""
    c1, c2, _ = spec.model.constants()
    g = gamma_fn(2.0 * spec.alpha + 1.0)
    return spec.lam * c2 * spec.span ** (2.0 * spec.alpha) / ((c1 * spec.span) ** 2 * g)


def equicontinuity_modulus(spec: ProblemSpec, t1: float, t2: float) -> float:
    """Uniform bound on ``|K(u)(t2) - K(u)(t1)|`` for ``t1 <= t2``.

    Grows like the difference of the fractional powers of the elapsed
    times, so it vanishes as ``t2 -> t1`` independently of ``u``.
    """
    ts = spec.timescale
    if t1 > t2:
        raise ValueError("pair must satisfy t1 <= t2")
    if t1 < ts.t0 - 1e-12 or t2 > ts.T + 1e-12:
        raise ValueError("pair must lie inside the time scale window")
    c1, c2, _ = spec.model.constants()
    g = gamma_fn(2.0 * spec.alpha + 1.0)
    tau1 = max(t1 - ts.t0, 0.0)
    tau2 = max(t2 - ts.t0, 0.0)
    scale = spec.lam * c2 / ((c1 * spec.span) ** 2 * g)
    return scale * (tau2 ** (2.0 * spec.alpha) - tau1 ** (2.0 * spec.alpha))


# -- the operator ----------------------------------------------------------


def _check_grid(spec: ProblemSpec, u: GridFunction) -> None:
    if u.grid != spec.grid:
        raise ValueError("grid function is not sampled on the problem grid")


def denominator(spec: ProblemSpec, u: GridFunction) -> float:
    """The nonlocal coupling: squared delta integral of ``f(u)``.

    Bounded below by ``(c1 * span)**2 > 0``, so the operator never
    divides by anything small.
    """
    _check_grid(spec, u)
    fv = spec.model.apply(u.to_array())
    total = delta_integral(
        GridFunction.from_array(spec.grid, fv), spec.timescale.t0, spec.timescale.T
    )
    return total**2


def _apply_k_array(spec: ProblemSpec, u: np.ndarray) -> np.ndarray:
    fv = spec.model.apply(u)
    den = (
        delta_integral(
            GridFunction.from_array(spec.grid, fv),
            spec.timescale.t0,
            spec.timescale.T,
        )
        ** 2
    )
    w = frac_integral_operator(spec.grid, 2.0 * spec.alpha)
    return spec.lam * (w @ fv) / den


def apply_K(spec: ProblemSpec, u: GridFunction) -> GridFunction:
    """One application of the solution operator to a sampled profile.

    The result starts at exactly zero (the fractional integral over the
    empty window) and is nonnegative whenever ``lam >= 0``.
    """
    _check_grid(spec, u)
    return GridFunction.from_array(spec.grid, _apply_k_array(spec, u.to_array()))


# -- Picard iteration ------------------------------------------------------


@dataclass(frozen=True)
class SolveReport:
    """Everything produced by one Picard run.

    ``trace[k]`` is the sup-norm update size at iteration ``k + 1``;
    ``apriori_bound`` is the contraction-based error bound
    ``q * trace[-1] / (1 - q)``, present only when ``q < 1``.
    """

    solution: GridFunction
    iterations: int
    converged: bool
    trace: tuple[float, ...]
    q: float
    lambda_star: float
    residual: float
    apriori_bound: float | None
    sup_bound: float
    positive: bool

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "trace": list(self.trace),
            "q": self.q,
            "lambda_star": self.lambda_star if math.isfinite(self.lambda_star) else "inf",
            "residual": self.residual,
            "apriori_bound": self.apriori_bound,
            "sup_bound": self.sup_bound,
            "positive": self.positive,
            "solution": {
                "t": list(self.solution.grid.nodes),
                "u": list(self.solution.values),
            },
        }


def picard_solve(spec: ProblemSpec, u0: GridFunction | None = None) -> SolveReport:
    """Iterate the damped solution operator to a fixed point.

    Starts from ``u0`` (default: identically zero) and stops when the
    sup-norm update drops to ``tol`` or ``max_iter`` is exhausted; the
    latter is reported through ``converged``, not raised.  The residual
    is measured by one extra operator application after the loop.
    """
    grid = spec.grid
    if u0 is None:
        u = np.zeros(len(grid.nodes))
    else:
        _check_grid(spec, u0)
        u = u0.to_array()
    theta = spec.theta
    trace: list[float] = []
    converged = False
    for _ in range(spec.max_iter):
        ku = _apply_k_array(spec, u)
        nxt = ku if theta == 1.0 else (1.0 - theta) * u + theta * ku
        step = float(np.max(np.abs(nxt - u)))
        trace.append(step)
        u = nxt
        if step <= spec.tol:
            converged = True
            break
    residual = float(np.max(np.abs(_apply_k_array(spec, u) - u)))
    q = contraction_constant(spec)
    apriori = q * trace[-1] / (1.0 - q) if q < 1.0 else None
    return SolveReport(
        solution=GridFunction.from_array(grid, u),
        iterations=len(trace),
        converged=converged,
        trace=tuple(trace),
        q=q,
        lambda_star=uniqueness_threshold(spec),
        residual=residual,
        apriori_bound=apriori,
        sup_bound=sup_bound(spec),
        positive=bool(np.all(u >= 0.0)),
    )


# -- a posteriori diagnostics ---------------------------------------------


@dataclass(frozen=True)
class DiagnosticCheck:
    """One a posteriori check: ``observed`` must stay below ``bound``."""

    name: str
    passed: bool
    observed: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.observed

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "observed": self.observed,
            "bound": self.bound if math.isfinite(self.bound) else "inf",
            "margin": self.margin if math.isfinite(self.margin) else "inf",
        }


@dataclass(frozen=True)
class ExistenceDiagnostics:
    """Bundle of a posteriori checks against the explicit bounds."""

    checks: tuple[DiagnosticCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }


def existence_diagnostics(
    spec: ProblemSpec,
    report: SolveReport,
    n_random_pairs: int = 100,
    seed: int = 0,
) -> ExistenceDiagnostics:
    """Check a computed solution against the a priori bounds.

    Three checks: the sup norm against ``sup_bound``, the increments over
    all adjacent plus ``n_random_pairs`` random node pairs against the
    equicontinuity modulus, and the residual against the fixed-point
    bound ``tol * (1 + q) / (1 - q)`` (skipped trivially when ``q >= 1``).
    The modulus applies exactly to operator images; the solution is one
    only up to the residual, so both checks carry that slack plus a
    rounding allowance.
    """
    u = report.solution.to_array()
    nodes = spec.grid.nodes
    n = len(nodes)
    eps = 1e-12 * (1.0 + float(np.max(np.abs(u))))

    obs_sup = float(np.max(np.abs(u)))
    bnd_sup = report.sup_bound + report.residual + eps
    sup_check = DiagnosticCheck(
        name="sup_norm", passed=obs_sup <= bnd_sup, observed=obs_sup, bound=bnd_sup
    )

    pairs = [(i, i + 1) for i in range(n - 1)]
    rng = np.random.default_rng(seed)
    for _ in range(n_random_pairs):
        i = int(rng.integers(0, n - 1))
        j = int(rng.integers(i + 1, n))
        pairs.append((i, j))
    slack = 2.0 * report.residual + eps
    worst = -math.inf
    for i, j in pairs:
        incr = float(abs(u[j] - u[i]))
        mod = equicontinuity_modulus(spec, nodes[i], nodes[j])
        worst = max(worst, incr - mod)
    equi_check = DiagnosticCheck(
        name="equicontinuity", passed=bool(worst <= slack), observed=worst, bound=slack
    )

    if report.q < 1.0:
        bnd_res = spec.tol * (1.0 + report.q) / (1.0 - report.q) + eps
    else:
        bnd_res = math.inf
    res_check = DiagnosticCheck(
        name="residual",
        passed=report.residual <= bnd_res,
        observed=report.residual,
        bound=bnd_res,
    )

    return ExistenceDiagnostics(checks=(sup_check, equi_check, res_check))
