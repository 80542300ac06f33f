"""Experiment orchestration, configuration, and report persistence.

Each experiment produces a flat list of report rows; a row records what was
measured, the bound it was compared against (when one applies), the Monte
Carlo standard error (when stochastic), the truncation error budget, and the
resulting pass/fail flag, so every verdict is recomputable from the emitted
fields alone.  Rows embed the fully resolved configuration (defaults, seed,
and worker count included) under the ``config`` key of their parameter echo.

Trend checks (monotone decrease along a ladder) are encoded row-wise: the
row for step i uses the measurement of step i-1 as its bound, shifted by the
declared monotonicity slack.  Declared tolerances are configuration, not
code; the defaults live in the tables below.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .diffusion import (
    FELLER,
    chain_scaling_moments,
    feller_exact_terminal,
    feller_semigroup_closed_form,
    semigroup_mc,
)
from .errors import ConfigError
from .funcspace import CATALOG, Grid, make_geometric_grid, weight_eval
from .generator import (
    GeneratorKind,
    VoronovskayaReport,
    fit_rate,
    generator_apply,
    semigroup_rate_bound,
    voronovskaya_bound,
    voronovskaya_residual,
)
from .iterates import (
    bernstein_kernel,
    build_sm_kernel,
    chain_terminal_values,
    kelisky_rivlin_reference,
    kernel_iterate,
    lattice_cutoff,
)
from .mc import ks_distance, resolve_workers, sample_across_workers
from .operators import TruncationPolicy, sm_apply, sm_exponential_closed_form

EXPERIMENTS = (
    "voronovskaya",
    "semigroup",
    "kelisky-rivlin",
    "korovkin",
    "weak-convergence",
)

# Shared defaults; per-experiment tables override and extend them.
_COMMON_DEFAULTS = {
    "alpha": 2.0,
    "seed": 42,
    "tail_eps": 1e-12,
    "samples": 100_000,
    "x_max": 50.0,
    "grid_points": 300,
    "dense_head": 100,
    "x_panel": (0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0),
    "format": "csv",
    "output_path": None,
}

_EXPERIMENT_DEFAULTS = {
    "voronovskaya": {
        "n_ladder": (4, 16, 64, 256, 1024),
        "t": 0.0,
        "function_label": "f1",
        "slope_window": (-0.65, -0.35),
        "residual_zero_tolerance": 1e-6,
    },
    "semigroup": {
        "n_ladder": (8, 32, 128),
        "t": 1.0,
        "function_label": "f1",
        "final_tolerance": 0.02,
        "monotonicity_slack": 0.0,
    },
    "kelisky-rivlin": {
        "n_ladder": (5,),
        "function_label": "e2",
        "k_max": 200,
        "final_tolerance": 1e-8,
        "monotonicity_slack": 1e-12,
    },
    "korovkin": {
        "n_ladder": (1, 10, 100),
        "lambdas": (1.0, 2.0, 3.0),
        "agreement_tolerance": 1e-10,
        "final_tolerance": 0.01,
    },
    "weak-convergence": {
        "n_ladder": (10, 50, 250),
        "t": 1.0,
        "x": 1.0,
        "ks_tolerance": 0.02,
        "identity_tolerance": 1e-10,
        "monotonicity_slack": 0.0,
    },
}


@dataclass
class ExperimentConfig:
    """Fully resolved experiment parameters; see the defaults tables above."""

    experiment: str
    n_ladder: tuple = ()
    alpha: float = 2.0
    t: float = 0.0
    x: float = 1.0
    function_label: str = "f1"
    samples: int = 100_000
    seed: int = 42
    tail_eps: float = 1e-12
    x_max: float = 50.0
    grid_points: int = 300
    dense_head: int = 100
    x_panel: tuple = ()
    k_max: int = 200
    lambdas: tuple = (1.0, 2.0, 3.0)
    slope_window: tuple = (-0.65, -0.35)
    residual_zero_tolerance: float = 1e-6
    agreement_tolerance: float = 1e-10
    final_tolerance: float = 0.02
    ks_tolerance: float = 0.02
    identity_tolerance: float = 1e-10
    monotonicity_slack: float = 0.0
    format: str = "csv"
    output_path: Optional[str] = None

    @classmethod
    def for_experiment(cls, experiment: str, overrides: Optional[dict] = None):
        """Build a config from the defaults tables plus explicit overrides."""
        if experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}"
            )
        values = dict(_COMMON_DEFAULTS)
        values.update(_EXPERIMENT_DEFAULTS[experiment])
        known = {f.name for f in fields(cls)} - {"experiment"}
        for key, val in (overrides or {}).items():
            if key == "experiment":
                if val != experiment:
                    raise ConfigError(
                        f"config names experiment {val!r} but {experiment!r} was requested"
                    )
                continue
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = val
        cfg = cls(experiment=experiment, **_normalize(values))
        cfg.validate()
        return cfg

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        ladder = self.n_ladder
        if not ladder or any(int(n) != n or n < 1 for n in ladder):
            raise ConfigError("n_ladder must hold positive integers")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("n_ladder must be strictly increasing")
        if self.function_label not in CATALOG:
            raise ConfigError(
                f"unknown function {self.function_label!r}; "
                f"catalog: {sorted(CATALOG)}"
            )
        if self.alpha < 1:
            raise ConfigError("alpha must be >= 1")
        if self.t < 0:
            raise ConfigError("t must be nonnegative")
        if self.x < 0:
            raise ConfigError("x must be nonnegative")
        if self.samples < 2:
            raise ConfigError("samples must be >= 2")
        if not (0.0 < self.tail_eps < 1.0):
            raise ConfigError("tail_eps must lie in (0, 1)")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        lams = self.lambdas
        if len(lams) != 3 or not (0.0 < lams[0] < lams[1] < lams[2]):
            raise ConfigError("lambdas must be three strictly increasing positives")
        if any(p < 0 for p in self.x_panel) or any(
            b <= a for a, b in zip(self.x_panel, self.x_panel[1:])
        ):
            raise ConfigError("x_panel must be strictly increasing and nonnegative")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")

    def resolved(self, workers: int) -> dict:
        """The full config echo embedded in every report row."""
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        for key, val in out.items():
            if isinstance(val, tuple):
                out[key] = list(val)
        out["workers"] = workers
        return out

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(tail_eps=self.tail_eps)

    def grid(self) -> Grid:
        return make_geometric_grid(self.x_max, self.grid_points, self.dense_head)

    def function(self):
        return CATALOG[self.function_label]


def _normalize(values: dict) -> dict:
    out = dict(values)
    for key in ("n_ladder", "x_panel", "lambdas", "slope_window"):
        if key in out and out[key] is not None:
            out[key] = tuple(out[key])
    if "n_ladder" in out:
        out["n_ladder"] = tuple(int(n) for n in out["n_ladder"])
    return out


def load_config_file(path: str) -> dict:
    """Read a JSON config file (keys must match ExperimentConfig fields)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def floor_nt(n: int, t: float) -> int:
    """Integer part of n*t with an epsilon guard against float shortfall.

    Without the guard, representable products like 10 * 0.3 = 2.999...96
    would floor to the wrong step count at integral n*t.
    """
    return int(math.floor(n * t + 1e-9))


@dataclass(frozen=True)
class ReportRow:
    """One measurement with its verdict; see the module docstring."""

    experiment: str
    params: dict
    measured: float
    bound: Optional[float]
    stderr: Optional[float]
    error_budget: Optional[float]
    passed: bool

    def param_json(self) -> str:
        return json.dumps(self.params, sort_keys=True)


@dataclass(frozen=True)
class ConvergenceReport:
    """Rows plus the per-ladder aggregates of one experiment run."""

    experiment: str
    config: dict
    rows: tuple
    n_values: tuple = ()
    measured: tuple = ()
    bounds: tuple = ()
    fitted_slope: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def _row(experiment, echo, params, measured, bound=None, stderr=None,
         error_budget=None, slack=0.0):
    """Build a row; the verdict is measured <= bound + slack (or pass when
    no bound applies)."""
    passed = True if bound is None else bool(measured <= bound + slack)
    return ReportRow(
        experiment=experiment,
        params={**params, "config": echo},
        measured=float(measured),
        bound=None if bound is None else float(bound),
        stderr=None if stderr is None else float(stderr),
        error_budget=None if error_budget is None else float(error_budget),
        passed=passed,
    )


def run_voronovskaya(config: ExperimentConfig) -> ConvergenceReport:
    """Measured second-order residual norms against the explicit rate bound.

    Emits one row per ladder entry (measured residual vs bound when the
    function carries a positive Lipschitz constant for f'', else vs the
    polynomial-exactness tolerance) and, when at least three residuals are
    strictly positive, a fitted log-log rate row checked against the
    declared slope window.
    """
    config.validate()
    workers = resolve_workers()
    echo = config.resolved(workers)
    grid = config.grid()
    f = config.function()
    policy = config.policy()
    lip = f.lip_d2
    use_bounds = lip is not None and lip > 0.0 and config.alpha > 1.5

    rows = []
    residuals = []
    bounds = []
    for n in config.n_ladder:
        resid = voronovskaya_residual(n, f, config.alpha, grid, policy)
        residuals.append(resid)
        if use_bounds:
            bnd = voronovskaya_bound(n, config.alpha, lip)
            bounds.append(bnd)
            rows.append(_row(
                config.experiment, echo,
                {"check": "residual-vs-bound", "n": n, "f": f.label,
                 "alpha": config.alpha, "lip_d2": lip},
                resid, bound=bnd,
            ))
        elif lip == 0.0:
            # polynomial of degree <= 2: the expansion is exact, so the
            # residual must sit at numerical-noise level
            bounds.append(None)
            rows.append(_row(
                config.experiment, echo,
                {"check": "polynomial-exactness", "n": n, "f": f.label,
                 "alpha": config.alpha},
                resid, bound=config.residual_zero_tolerance,
            ))
        else:
            # no Lipschitz data (or alpha outside the bound's domain):
            # report the residual without a verdict
            bounds.append(None)
            rows.append(_row(
                config.experiment, echo,
                {"check": "residual-only", "n": n, "f": f.label,
                 "alpha": config.alpha},
                resid, bound=None,
            ))

    slope = None
    positive = [(n, r) for n, r in zip(config.n_ladder, residuals) if r > 0.0]
    if use_bounds and len(positive) >= 3:
        slope = fit_rate([n for n, _ in positive], [r for _, r in positive])
        lo, hi = config.slope_window
        rows.append(ReportRow(
            experiment=config.experiment,
            params={"check": "fitted-rate", "f": f.label,
                    "window": [lo, hi], "config": echo},
            measured=float(slope),
            bound=None,
            stderr=None,
            error_budget=None,
            passed=bool(lo <= slope <= hi),
        ))

    detail = VoronovskayaReport(
        n_values=tuple(config.n_ladder),
        residual_norms=tuple(residuals),
        bounds=tuple(bounds),
        fitted_slope=slope,
    )
    return ConvergenceReport(
        experiment=config.experiment,
        config=echo,
        rows=tuple(rows),
        n_values=detail.n_values,
        measured=detail.residual_norms,
        bounds=detail.bounds,
        fitted_slope=detail.fitted_slope,
    )


def _snap_panel(panel, n):
    """Snap panel points to lattice points i/n (dropping duplicates)."""
    idx = sorted({int(round(x * n)) for x in panel})
    return np.array(idx), np.array(idx, dtype=float) / n


def run_semigroup_convergence(config: ExperimentConfig) -> ConvergenceReport:
    """Iterate-vs-limit-semigroup discrepancy along an n ladder.

    For each n the kernel iterate with floor(n t) steps is compared against
    the limit semigroup at exact time t on the x panel (snapped to lattice
    points), in the weighted sup sense.  The reference is the exponential
    closed form when the test function is one of f1, f2, f3, otherwise an
    exact-sampler Monte Carlo estimate.  Pass requires the discrepancies to
    be non-increasing along the ladder and the final one to meet the
    declared tolerance.
    """
    config.validate()
    workers = resolve_workers()
    echo = config.resolved(workers)
    f = config.function()
    t = config.t
    lam = {"f1": 1.0, "f2": 2.0, "f3": 3.0}.get(config.function_label)
    panel_max = max(config.x_panel) if config.x_panel else config.x
    rows = []
    discrepancies = []
    heuristic_bounds = []

    # Reported (not asserted) rate bound needs the weighted norm of the
    # generator image and a Lipschitz constant; skip when unavailable.
    lip = f.lip_d2
    norm_af = None
    if lip is not None and config.alpha > 1.5:
        grid = config.grid()
        af_vals = np.array([
            generator_apply(GeneratorKind.SM_HALF_X, f, float(x))
            for x in grid.points
        ])
        norm_af = float(np.max(np.abs(
            np.array([weight_eval(config.alpha, float(x)) for x in grid.points])
            * af_vals)))

    for pos, n in enumerate(config.n_ladder):
        k = floor_nt(n, t)
        K = lattice_cutoff(n, panel_max, config.tail_eps)
        kernel = build_sm_kernel(
            n, K, config.tail_eps,
            checked_rows=int(math.ceil(n * panel_max)),
        )
        lattice_fn = kernel_iterate(kernel, f, k)
        idx, xs = _snap_panel(config.x_panel, n)
        w = np.array([weight_eval(config.alpha, float(x)) for x in xs])

        stderr = None
        if lam is not None:
            ref = np.array([feller_semigroup_closed_form(lam, float(x), t) for x in xs])
        else:
            ests = [
                semigroup_mc(FELLER, t, float(x), f, config.samples,
                             seed=(config.seed, pos, i), workers=workers)
                for i, x in enumerate(xs)
            ]
            ref = np.array([e.mean for e in ests])
            stderr = max(e.stderr for e in ests)

        disc = float(np.max(w * np.abs(lattice_fn.values[idx] - ref)))
        budget = float(np.max(lattice_fn.error_budget[idx]))
        discrepancies.append(disc)

        hb = None
        if norm_af is not None and lip is not None and lip > 0:
            hb = semigroup_rate_bound(n, t, config.alpha, norm_af, lip)
        heuristic_bounds.append(hb)

        prev = discrepancies[pos - 1] if pos > 0 else None
        params = {"check": "iterate-vs-semigroup", "n": n, "k": k,
                  "f": f.label, "t": t, "alpha": config.alpha,
                  "rate_bound_heuristic": hb}
        rows.append(_row(config.experiment, echo, params, disc,
                         bound=prev, stderr=stderr, error_budget=budget,
                         slack=config.monotonicity_slack))

    rows.append(_row(
        config.experiment, echo,
        {"check": "final-discrepancy", "n": config.n_ladder[-1], "f": f.label,
         "t": t, "alpha": config.alpha},
        discrepancies[-1], bound=config.final_tolerance,
    ))
    slope = None
    if len(config.n_ladder) >= 3 and all(d > 0 for d in discrepancies):
        slope = fit_rate(config.n_ladder, discrepancies)
    return ConvergenceReport(
        experiment=config.experiment,
        config=echo,
        rows=tuple(rows),
        n_values=tuple(config.n_ladder),
        measured=tuple(discrepancies),
        bounds=tuple(heuristic_bounds),
        fitted_slope=slope,
    )


def run_kelisky_rivlin(config: ExperimentConfig) -> ConvergenceReport:
    """Fixed-n Bernstein iterates against their linear-interpolant limit.

    Iterates the exact binomial kernel k_max times and reports the sup
    lattice deviation from the chord through (0, f(0)) and (1, f(1)) per
    step; deviations must be non-increasing (within the declared numerical
    slack) for k >= 1 and the final one must meet the tolerance.
    """
    config.validate()
    workers = resolve_workers()
    echo = config.resolved(workers)
    n = config.n_ladder[0]
    f = config.function()
    kernel = bernstein_kernel(n)
    latt = kernel.lattice()
    ref = np.array([kelisky_rivlin_reference(f, float(x)) for x in latt])

    v = np.asarray(f(latt), dtype=float)
    deviations = []
    for _ in range(config.k_max):
        v = kernel.matrix @ v
        deviations.append(float(np.max(np.abs(v - ref))))

    rows = []
    for k, dev in enumerate(deviations, start=1):
        prev = deviations[k - 2] if k >= 2 else None
        rows.append(_row(
            config.experiment, echo,
            {"check": "deviation", "n": n, "k": k, "f": f.label},
            dev, bound=prev, slack=config.monotonicity_slack,
        ))
    rows.append(_row(
        config.experiment, echo,
        {"check": "final-deviation", "n": n, "k": config.k_max, "f": f.label},
        deviations[-1], bound=config.final_tolerance,
    ))
    return ConvergenceReport(
        experiment=config.experiment,
        config=echo,
        rows=tuple(rows),
        n_values=tuple(range(1, config.k_max + 1)),
        measured=tuple(deviations),
    )


def run_korovkin(config: ExperimentConfig) -> ConvergenceReport:
    """Exponential test family: series-vs-closed-form agreement and norm decay.

    For each rate lambda and ladder entry n, checks that the truncated
    series agrees with the closed form on the whole grid within the declared
    tolerance, and that the weighted norm distance from the operator image
    to the function itself decreases along the ladder, ending below the
    declared tolerance.
    """
    config.validate()
    workers = resolve_workers()
    echo = config.resolved(workers)
    grid = config.grid()
    policy = config.policy()
    rows = []
    final_norms = []
    for lam in config.lambdas:
        f = CATALOG[f"f{int(lam)}"] if lam in (1.0, 2.0, 3.0) else None
        fn = (lambda u, lam=lam: np.exp(-lam * np.asarray(u, dtype=float))) if f is None else f
        norm_errors = []
        for pos, n in enumerate(config.n_ladder):
            agree = 0.0
            for x in grid.points:
                x = float(x)
                series = sm_apply(n, fn, x, policy).value
                closed = sm_exponential_closed_form(n, lam, x)
                agree = max(agree, abs(series - closed))
            rows.append(_row(
                config.experiment, echo,
                {"check": "series-vs-closed-form", "n": n, "lambda": lam},
                agree, bound=config.agreement_tolerance,
            ))
            w = np.array([weight_eval(config.alpha, float(x)) for x in grid.points])
            closed_vals = np.array([
                sm_exponential_closed_form(n, lam, float(x)) for x in grid.points
            ])
            exact_vals = np.exp(-lam * grid.points)
            norm_err = float(np.max(w * np.abs(closed_vals - exact_vals)))
            prev = norm_errors[pos - 1] if pos > 0 else None
            norm_errors.append(norm_err)
            rows.append(_row(
                config.experiment, echo,
                {"check": "norm-error", "n": n, "lambda": lam,
                 "alpha": config.alpha},
                norm_err, bound=prev,
            ))
        rows.append(_row(
            config.experiment, echo,
            {"check": "final-norm-error", "n": config.n_ladder[-1], "lambda": lam,
             "alpha": config.alpha},
            norm_errors[-1], bound=config.final_tolerance,
        ))
        final_norms.append(norm_errors[-1])
    return ConvergenceReport(
        experiment=config.experiment,
        config=echo,
        rows=tuple(rows),
        n_values=tuple(config.n_ladder),
        measured=tuple(final_norms),
    )


def run_weak_convergence(config: ExperimentConfig) -> ConvergenceReport:
    """Chain endpoints against exact diffusion draws along an n ladder.

    For each n, draws ``samples`` endpoints of the floor(n t)-step chain from
    x and equally many exact diffusion draws, and reports the two-sample
    Kolmogorov-Smirnov distance and the absolute difference of extinction
    frequencies.  Both sequences must be non-increasing along the ladder and
    the final KS distance must meet the declared tolerance.  The exact
    scaled one-step moment identities are verified at sampled lattice points
    as well.
    """
    config.validate()
    if config.t <= 0:
        raise ConfigError("weak-convergence requires t > 0")
    if config.x <= 0:
        raise ConfigError("weak-convergence requires x > 0")
    workers = resolve_workers()
    echo = config.resolved(workers)
    x, t = config.x, config.t
    rows = []
    ks_values = []
    ext_diffs = []
    for pos, n in enumerate(config.n_ladder):
        k = floor_nt(n, t)
        chain = sample_across_workers(
            lambda rng, m, n=n, k=k: chain_terminal_values(n, k, x, m, rng),
            config.samples, seed=(config.seed, pos, 0), workers=workers,
        )
        exact = sample_across_workers(
            lambda rng, m: feller_exact_terminal(x, t, m, rng),
            config.samples, seed=(config.seed, pos, 1), workers=workers,
        )
        ks = ks_distance(chain, exact)
        ext = abs(float(np.mean(chain == 0.0)) - float(np.mean(exact == 0.0)))
        prev_ks = ks_values[pos - 1] if pos > 0 else None
        prev_ext = ext_diffs[pos - 1] if pos > 0 else None
        ks_values.append(ks)
        ext_diffs.append(ext)
        rows.append(_row(
            config.experiment, echo,
            {"check": "ks-distance", "n": n, "k": k, "x": x, "t": t,
             "samples": config.samples},
            ks, bound=prev_ks, slack=config.monotonicity_slack,
        ))
        rows.append(_row(
            config.experiment, echo,
            {"check": "extinction-gap", "n": n, "k": k, "x": x, "t": t,
             "samples": config.samples},
            ext, bound=prev_ext, slack=config.monotonicity_slack,
        ))
        for y in _identity_points(n, x):
            mom = chain_scaling_moments(n, y)
            err = max(abs(mom.mean_scaled), abs(mom.var_scaled - y))
            rows.append(_row(
                config.experiment, echo,
                {"check": "scaling-identities", "n": n, "y": y},
                err, bound=config.identity_tolerance,
            ))
    rows.append(_row(
        config.experiment, echo,
        {"check": "final-ks", "n": config.n_ladder[-1], "x": x, "t": t},
        ks_values[-1], bound=config.ks_tolerance,
    ))
    return ConvergenceReport(
        experiment=config.experiment,
        config=echo,
        rows=tuple(rows),
        n_values=tuple(config.n_ladder),
        measured=tuple(ks_values),
    )


def _identity_points(n, x):
    """Lattice points where the scaled moment identities are spot-checked."""
    pts = {0.0}
    for target in (x, 2.0 * x):
        pts.add(round(target * n) / n)
    return sorted(pts)


_RUNNERS = {
    "voronovskaya": run_voronovskaya,
    "semigroup": run_semigroup_convergence,
    "kelisky-rivlin": run_kelisky_rivlin,
    "korovkin": run_korovkin,
    "weak-convergence": run_weak_convergence,
}


def run_experiment(config: ExperimentConfig) -> ConvergenceReport:
    return _RUNNERS[config.experiment](config)


CSV_HEADER = ("experiment", "param_json", "measured", "bound", "stderr",
              "error_budget", "pass")


def _fmt(value) -> str:
    """17-significant-digit decimal form (round-trips doubles exactly)."""
    return format(float(value), ".17g")


def emit_report(rows, path: str, format: str = "csv") -> None:
    """Persist rows as CSV or JSON (identical keys, 17-digit numbers)."""
    if format not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    try:
        if format == "csv":
            _emit_csv(rows, path)
        else:
            _emit_json(rows, path)
    except OSError as exc:
        raise OSError(f"failed writing report to {path}: {exc}") from exc


def _emit_csv(rows, path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                r.experiment,
                r.param_json(),
                _fmt(r.measured),
                "" if r.bound is None else _fmt(r.bound),
                "" if r.stderr is None else _fmt(r.stderr),
                "" if r.error_budget is None else _fmt(r.error_budget),
                "true" if r.passed else "false",
            ])


def _emit_json(rows, path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)

    def opt(v):
        return "null" if v is None else _fmt(v)

    lines = []
    for r in rows:
        lines.append(
            '  {"experiment": %s, "param_json": %s, "measured": %s, '
            '"bound": %s, "stderr": %s, "error_budget": %s, "pass": %s}'
            % (
                json.dumps(r.experiment),
                json.dumps(r.param_json()),
                _fmt(r.measured),
                opt(r.bound),
                opt(r.stderr),
                opt(r.error_budget),
                "true" if r.passed else "false",
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("[\n" + ",\n".join(lines) + "\n]\n")
