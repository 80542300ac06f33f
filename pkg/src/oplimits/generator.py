"""Degenerate second-order limit generators and quantitative residuals.

The scaled defect n(L_n f - f) of each lattice operator converges to a
degenerate elliptic operator a(x) f''(x):

* Szasz-Mirakyan: a(x) = x/2 on [0, inf);
* Bernstein: a(x) = x(1-x)/2 on [0, 1] (the Wright-Fisher generator);
* Baskakov: a(x) = x(x+1)/2, supported only by a heuristic computation and
  flagged experimental.

This module evaluates the generators, the explicit weighted-norm constant
controlling the Szasz-Mirakyan rate, the measured residual
``w_alpha |n(P_n f - f) - A f|`` and its theoretical bound, the assembled
iterate-to-semigroup rate bound, log-log rate fitting, and a checkable form
of the positive maximum principle.
"""

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .funcspace import Grid, second_derivative, weight_eval
from .operators import TruncationPolicy, DEFAULT_POLICY, sm_apply


class GeneratorKind(enum.Enum):
    """Tags the diffusion coefficient a(x) of a limit generator."""

    SM_HALF_X = "sm-half-x"
    WRIGHT_FISHER = "wright-fisher"
    BASKAKOV_HEURISTIC = "baskakov-heuristic"

    def coefficient(self, x: float) -> float:
        if self is GeneratorKind.SM_HALF_X:
            return 0.5 * x
        if self is GeneratorKind.WRIGHT_FISHER:
            return 0.5 * x * (1.0 - x)
        return 0.5 * x * (x + 1.0)

    @property
    def experimental(self) -> bool:
        # The Baskakov coefficient comes from a heuristic expansion only.
        return self is GeneratorKind.BASKAKOV_HEURISTIC


def generator_apply(kind: GeneratorKind, f, x: float, h: float = 1e-4) -> float:
    """Evaluate a(x) f''(x), with the degenerate boundary values forced to 0.

    Uses the analytic second derivative when ``f`` carries one, else the
    O(h^2) finite-difference stencil of :func:`second_derivative`.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if kind is GeneratorKind.WRIGHT_FISHER and x > 1.0:
        raise ValueError(f"Wright-Fisher generator is defined on [0, 1], got x={x}")
    if x == 0.0:
        return 0.0
    if kind is GeneratorKind.WRIGHT_FISHER and x == 1.0:
        return 0.0
    return kind.coefficient(x) * second_derivative(f, x, h)


def m_alpha(alpha: float) -> float:
    """Weighted-norm constant in the Szasz-Mirakyan residual bound.

    Equals the sum of the two weighted suprema
    ``3^(3/4) sup x^(3/2) w_alpha(x)`` and ``sup x^(3/4) w_alpha(x)``,
    each evaluated in closed form.  Defined for alpha > 3/2; the first
    supremum degenerates at alpha = 3/2.
    """
    if alpha <= 1.5:
        raise ValueError(f"m_alpha requires alpha > 3/2, got {alpha}")
    first = (
        3.0 ** 0.75
        * (2.0 * alpha - 3.0)
        / (2.0 * alpha)
        * (3.0 / (2.0 * alpha - 3.0)) ** (3.0 / (2.0 * alpha))
    )
    second = (
        (4.0 * alpha - 3.0)
        / (4.0 * alpha)
        * (3.0 / (4.0 * alpha - 3.0)) ** (3.0 / (4.0 * alpha))
    )
    return float(first + second)


def voronovskaya_residual(
    n: int,
    f,
    alpha: float,
    grid: Grid,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> float:
    """Measured weighted residual of the second-order expansion.

    Returns ``max over the grid of w_alpha(x) |n (P_n f(x) - f(x)) - (x/2) f''(x)|``
    where P_n is the Szasz-Mirakyan operator.  A grid max, hence a lower
    bound of the sup over [0, inf).
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    worst = 0.0
    for x in grid.points:
        x = float(x)
        pn = sm_apply(n, f, x, policy).value
        residual = n * (pn - float(f(x))) - generator_apply(GeneratorKind.SM_HALF_X, f, x)
        worst = max(worst, weight_eval(alpha, x) * abs(residual))
    return worst


def voronovskaya_bound(n: int, alpha: float, lip_d2: float) -> float:
    """Theoretical residual bound ``m_alpha(alpha) * lip_d2 / (6 sqrt(n))``.

    Valid whenever f'' is Lipschitz with constant ``lip_d2`` and
    alpha > 3/2; holds for every n, not just asymptotically.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if lip_d2 < 0:
        raise ValueError("lip_d2 must be nonnegative")
    return m_alpha(alpha) * lip_d2 / (6.0 * np.sqrt(n))


def semigroup_rate_bound(
    n: int,
    t: float,
    alpha: float,
    norm_af: float,
    lip_d2: float,
    lip_d2_along_flow: Optional[Callable[[float], float]] = None,
) -> float:
    """Assembled iterate-to-semigroup rate bound at time t.

    Computes ``(sqrt(t/n) + 1/n) (norm_af + m_alpha lip_d2 / (6 sqrt n))``
    plus the composite-trapezoid quadrature (64 panels) of
    ``s -> m_alpha lip_d2_along_flow(s) / (6 sqrt n)`` over [0, t].

    The flow term needs the Lipschitz constant of the evolved function's
    second derivative, which is not computable in closed form; when omitted
    it defaults to the constant ``lip_d2``, a heuristic that is NOT backed
    by the theory and is intended for reporting only.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if norm_af < 0 or lip_d2 < 0:
        raise ValueError("norms and Lipschitz constants must be nonnegative")
    ma = m_alpha(alpha)
    if lip_d2_along_flow is None:
        lip_d2_along_flow = lambda s: lip_d2  # noqa: E731 - heuristic default
    head = (np.sqrt(t / n) + 1.0 / n) * (norm_af + ma * lip_d2 / (6.0 * np.sqrt(n)))
    if t == 0.0:
        return float(head)
    s = np.linspace(0.0, t, 65)
    g = np.array([ma * float(lip_d2_along_flow(si)) / (6.0 * np.sqrt(n)) for si in s])
    panel = t / 64.0
    integral = panel * (0.5 * g[0] + g[1:-1].sum() + 0.5 * g[-1])
    return float(head + integral)


def fit_rate(n_values: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(n)."""
    n_values = np.asarray(n_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if n_values.size < 3:
        raise ValueError("need at least 3 points to fit a rate")
    if n_values.size != errors.size:
        raise ValueError("n_values and errors must have equal length")
    if np.any(errors <= 0):
        raise ValueError("errors must be strictly positive for a log fit")
    return float(np.polyfit(np.log(n_values), np.log(errors), 1)[0])


@dataclass(frozen=True)
class VoronovskayaReport:
    """Per-n measured residual norms, theoretical bounds, and fitted rate."""

    n_values: tuple
    residual_norms: tuple
    bounds: tuple  # entries may be None when no Lipschitz data is available
    fitted_slope: Optional[float]

    def __post_init__(self):
        if not (len(self.n_values) == len(self.residual_norms) == len(self.bounds)):
            raise ValueError("report sequences must have equal length")


class MaxPrincipleResult(NamedTuple):
    """Outcome of a positive-maximum-principle check with its witness point."""

    passed: bool
    x0: float
    generator_value: float


def positive_max_principle_check(
    kind: GeneratorKind, f, grid: Grid, tol: float = 1e-6
) -> MaxPrincipleResult:
    """Check a(x0) f''(x0) <= tol at the grid argmax x0 of f, when f(x0) >= 0.

    The tolerance absorbs O(h^2) finite-difference error.  If the grid max
    is negative the principle's hypothesis is empty and the check passes
    vacuously; the witness point is reported either way.
    """
    vals = np.asarray(f(grid.points), dtype=float)
    i0 = int(np.argmax(vals))
    x0 = float(grid.points[i0])
    gval = generator_apply(kind, f, x0)
    passed = (vals[i0] < 0.0) or (gval <= tol)
    return MaxPrincipleResult(passed=bool(passed), x0=x0, generator_value=gval)
