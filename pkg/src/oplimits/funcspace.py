"""Weighted function spaces on the half line.

Provides the polynomial-taming weights ``w_alpha(x) = 1/(1 + x^alpha)``,
grid-based approximations of the weighted sup-norm, finite-difference
second derivatives, Lipschitz-constant estimation for second derivatives,
and a catalog of standard test functions (exponentials, monomials and two
bounded rational/exponential profiles).

All sup-type quantities are evaluated as maxima over finite grids and are
therefore lower bounds of the corresponding suprema over [0, inf).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError

# Finite-difference step for second derivatives; balances O(h^2) truncation
# against double-precision roundoff in the divided difference.
DEFAULT_FD_STEP = 1e-4


def weight_eval(alpha: float, x: float):
    """Evaluate the weight ``1 / (1 + x**alpha)``.

    Parameters
    ----------
    alpha : float
        Weight exponent, must satisfy ``alpha >= 1``.
    x : float or ndarray
        Evaluation point(s), must be nonnegative.

    Returns
    -------
    float or ndarray
        Weight value(s) in (0, 1], equal to 1 at x = 0 and strictly
        decreasing on (0, inf).
    """
    if alpha < 1:
        raise ValueError(f"weight exponent alpha must be >= 1, got {alpha}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("weight is only defined on [0, inf)")
    out = 1.0 / (1.0 + xa ** alpha)
    return float(out) if np.isscalar(x) else out


@dataclass(frozen=True)
class Weight:
    """The weight function ``x -> 1/(1 + x**alpha)`` for a fixed exponent."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError(f"weight exponent alpha must be >= 1, got {self.alpha}")

    def __call__(self, x):
        return weight_eval(self.alpha, x)


@dataclass(frozen=True)
class TestFunction:
    """An evaluatable function on [0, inf) with optional analytic extras.

    Attributes
    ----------
    label : str
        Catalog identifier.
    fn : callable
        Vectorized evaluation map; total and finite on [0, inf).
    d2_fn : callable, optional
        Analytic second derivative, used in preference to finite
        differences when present.
    lip_d2 : float, optional
        A known Lipschitz constant of the second derivative.
    sup_bound : float, optional
        A known bound on sup |f|.
    """

    label: str
    fn: Callable
    d2_fn: Optional[Callable] = None
    lip_d2: Optional[float] = None
    sup_bound: Optional[float] = None

    # keep pytest from collecting this public class as a test case
    __test__ = False

    def __post_init__(self):
        if self.lip_d2 is not None and self.lip_d2 < 0:
            raise ValueError("lip_d2 must be nonnegative")
        if self.sup_bound is not None and self.sup_bound < 0:
            raise ValueError("sup_bound must be nonnegative")

    def __call__(self, x):
        return self.fn(x)


@dataclass(frozen=True)
class Grid:
    """A finite, strictly increasing set of evaluation points starting at 0."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("grid must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if pts[0] != 0.0:
            raise ValueError("grid must start at 0")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")

    def __len__(self):
        return self.points.size

    @property
    def x_max(self) -> float:
        return float(self.points[-1])

    def refine(self, factor: int) -> "Grid":
        """Insert ``factor - 1`` evenly spaced points into every gap."""
        if factor < 1:
            raise ValueError("refinement factor must be >= 1")
        if factor == 1:
            return self
        pts = self.points
        pieces = [pts[:1]]
        for a, b in zip(pts[:-1], pts[1:]):
            pieces.append(np.linspace(a, b, factor + 1)[1:])
        return Grid(np.concatenate(pieces))


def make_geometric_grid(x_max: float, m: int, dense_head: int = 0) -> Grid:
    """Build {0} plus a uniform head on (0, 1] plus a geometric tail.

    The head consists of ``dense_head`` uniformly spaced points
    ``i/dense_head`` (points above ``x_max`` are dropped); the tail
    consists of ``m - 1`` geometrically spaced points
    ``x_max**(j/(m-1))`` for j = 1..m-1.  The result is sorted and
    deduplicated.
    """
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    if m < 2:
        raise ValueError("m must be >= 2")
    if dense_head < 0:
        raise ValueError("dense_head must be nonnegative")
    parts = [np.array([0.0])]
    if dense_head > 0:
        head = np.arange(1, dense_head + 1, dtype=float) / dense_head
        parts.append(head[head <= x_max])
    j = np.arange(1, m, dtype=float)
    parts.append(x_max ** (j / (m - 1)))
    return Grid(np.unique(np.concatenate(parts)))


def default_grid() -> Grid:
    """The 400-point working grid: dense head on [0, 1], geometric tail to 50."""
    return make_geometric_grid(50.0, 300, 100)


def weighted_sup_norm(f, grid: Grid, alpha: float) -> float:
    """Max of ``|w_alpha(x) * f(x)|`` over the grid.

    A lower bound of the weighted sup-norm over [0, inf).  Raises
    :class:`EvaluationError` carrying the offending point if ``f`` is
    non-finite anywhere on the grid.
    """
    pts = grid.points
    vals = np.asarray(f(pts), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        x_bad = float(pts[np.nonzero(bad)[0][0]])
        raise EvaluationError(f"non-finite function value at x={x_bad}", x=x_bad)
    return float(np.max(np.abs(weight_eval(alpha, pts) * vals)))


def second_derivative(f, x: float, h: float = DEFAULT_FD_STEP) -> float:
    """Second derivative of ``f`` at ``x``.

    Uses the analytic derivative when the function carries one, otherwise
    a second-order finite-difference stencil: central for ``x >= h``,
    one-sided at the boundary.  O(h^2) accurate for C^4 functions.
    """
    if x < 0:
        raise ValueError("second_derivative is only defined on [0, inf)")
    if h <= 0:
        raise ValueError("step h must be positive")
    d2 = getattr(f, "d2_fn", None)
    if d2 is not None:
        return float(d2(x))
    if x >= h:
        return float((f(x - h) - 2.0 * f(x) + f(x + h)) / h ** 2)
    return float(
        (2.0 * f(x) - 5.0 * f(x + h) + 4.0 * f(x + 2 * h) - f(x + 3 * h)) / h ** 2
    )


def lipschitz_estimate_d2(f, grid: Grid) -> float:
    """Estimate the Lipschitz constant of ``f''``.

    Returns the function's declared constant when available, otherwise the
    maximum slope of the second derivative over adjacent grid pairs.  The
    grid estimate is a lower bound of the true constant.
    """
    declared = getattr(f, "lip_d2", None)
    if declared is not None:
        return float(declared)
    if len(grid) < 2:
        raise ValueError("need at least 2 grid points to estimate a slope")
    pts = grid.points
    d2 = np.array([second_derivative(f, float(x)) for x in pts])
    slopes = np.abs(np.diff(d2) / np.diff(pts))
    return float(np.max(slopes))


def _const_one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _const_zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _make_exp(lam: float) -> TestFunction:
    return TestFunction(
        label=f"f{int(lam)}",
        fn=lambda x, lam=lam: np.exp(-lam * np.asarray(x, dtype=float)),
        d2_fn=lambda x, lam=lam: lam ** 2 * np.exp(-lam * np.asarray(x, dtype=float)),
        lip_d2=lam ** 3,  # sup |f'''| = lam^3 at x = 0
        sup_bound=1.0,
    )


def catalog() -> dict:
    """Standard test functions keyed by label.

    e0, e1, e2 are the monomials 1, x, x^2; f1, f2, f3 are exp(-lam x)
    for lam = 1, 2, 3; xexp is x exp(-x); cauchy is 1/(1 + x^2).
    """
    funcs = {
        "e0": TestFunction("e0", _const_one, _const_zero, lip_d2=0.0, sup_bound=1.0),
        "e1": TestFunction(
            "e1",
            lambda x: np.asarray(x, dtype=float),
            _const_zero,
            lip_d2=0.0,
        ),
        "e2": TestFunction(
            "e2",
            lambda x: np.asarray(x, dtype=float) ** 2,
            lambda x: 2.0 * np.ones_like(np.asarray(x, dtype=float)),
            lip_d2=0.0,
        ),
        "xexp": TestFunction(
            "xexp",
            lambda x: np.asarray(x, dtype=float) * np.exp(-np.asarray(x, dtype=float)),
            lambda x: (np.asarray(x, dtype=float) - 2.0)
            * np.exp(-np.asarray(x, dtype=float)),
            lip_d2=3.0,  # sup |(3 - x) exp(-x)| = 3 at x = 0
            sup_bound=np.exp(-1.0),
        ),
        "cauchy": TestFunction(
            "cauchy",
            lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float) ** 2),
            lambda x: (6.0 * np.asarray(x, dtype=float) ** 2 - 2.0)
            / (1.0 + np.asarray(x, dtype=float) ** 2) ** 3,
            sup_bound=1.0,
        ),
    }
    for lam in (1.0, 2.0, 3.0):
        tf = _make_exp(lam)
        funcs[tf.label] = tf
    return funcs


CATALOG = catalog()
