"""Single applications of three positive linear lattice operators.

The operators average a function over a lattice {k/n} against a probability
distribution parameterized by the evaluation point x:

* Szasz-Mirakyan: Poisson(n x) weights, domain [0, inf);
* Bernstein: Binomial(n, x) weights, domain [0, 1];
* Baskakov: negative-binomial weights, domain [0, inf), experimental.

Infinite series are truncated at an index whose omitted probability mass is
below a policy tolerance; every truncated evaluation reports that omitted
mass alongside the value so downstream error budgets stay explicit.  Weights
are computed in log space (via ``gammaln``), which stays stable for Poisson
means up to at least 5e4.

Also provides the exact Poisson moment polynomials, the closed form of the
Szasz-Mirakyan operator on exponentials, the exact centered fourth moment,
and a Bernstein-type exponential concentration bound for the scaled Poisson
variable; these are the quantitative ingredients the convergence experiments
rely on.
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import EvaluationError, TruncationFailureError


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls where infinite lattice series are cut off.

    ``tail_eps`` bounds the omitted probability mass; ``max_terms`` caps the
    number of series terms regardless of the tolerance.
    """

    tail_eps: float = 1e-12
    max_terms: int = 10 ** 6

    def __post_init__(self):
        if not (0.0 < self.tail_eps < 1.0):
            raise ValueError(f"tail_eps must lie in (0, 1), got {self.tail_eps}")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")


DEFAULT_POLICY = TruncationPolicy()


class SeriesValue(NamedTuple):
    """A truncated series evaluation and the probability mass it omitted."""

    value: float
    omitted_mass: float


class OperatorKind(enum.Enum):
    SZASZ_MIRAKYAN = "szasz-mirakyan"
    BERNSTEIN = "bernstein"
    BASKAKOV = "baskakov"


@dataclass(frozen=True)
class OperatorInstance:
    """An operator family tag together with its index n >= 1."""

    kind: OperatorKind
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"operator index n must be >= 1, got {self.n}")

    def apply(self, f, x, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
        if self.kind is OperatorKind.SZASZ_MIRAKYAN:
            return sm_apply(self.n, f, x, policy).value
        if self.kind is OperatorKind.BERNSTEIN:
            return bernstein_apply(self.n, f, x)
        return baskakov_apply(self.n, f, x, policy).value


def _validate_n(n):
    if n < 1 or int(n) != n:
        raise ValueError(f"operator index n must be a positive integer, got {n}")
    return int(n)


def _cut_at_tail(k, pmf, ratio_at_end, policy):
    """Find the smallest K with certified tail mass <= tail_eps.

    ``ratio_at_end`` bounds the pmf ratio p_{j+1}/p_j for every j past the
    window end; the geometric remainder it implies is folded into every
    tail value, so the cut is rigorous even though the window is finite.
    Returns None when no certified cut exists inside the window.
    """
    if ratio_at_end < 1.0:
        remainder = pmf[-1] * ratio_at_end / (1.0 - ratio_at_end)
    else:
        return None
    # tail[j] = sum of pmf over j+1..end, plus the beyond-window remainder
    tail = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]]) + remainder
    cut = np.nonzero(tail <= policy.tail_eps)[0]
    if cut.size == 0:
        return None
    K = int(cut[0])
    return k[: K + 1], pmf[: K + 1], float(tail[K])


def _poisson_weights(lam: float, policy: TruncationPolicy):
    """Poisson(lam) pmf on 0..K plus the certified tail mass beyond K.

    K is the smallest cutoff whose upper-tail mass is <= ``tail_eps``.  The
    tail is an exact reversed summation over a mode-centered window (20
    standard deviations plus a buffer) augmented with a certified geometric
    remainder for the mass beyond the window; the window grows if the
    tolerance is not certifiably reached inside it.
    """
    if lam == 0.0:
        return np.arange(1), np.array([1.0]), 0.0
    hi = int(lam + 20.0 * np.sqrt(lam) + 60.0)
    while True:
        if hi + 1 > policy.max_terms:
            raise TruncationFailureError(
                f"series window for mean {lam} needs more than "
                f"max_terms={policy.max_terms} terms"
            )
        k = np.arange(hi + 1)
        pmf = np.exp(-lam + k * np.log(lam) - gammaln(k + 1.0))
        result = _cut_at_tail(k, pmf, lam / (hi + 1.0), policy)
        if result is not None:
            return result
        hi *= 2


def truncation_index(n: int, x: float, policy: TruncationPolicy = DEFAULT_POLICY) -> int:
    """Smallest K with Poisson(n x) mass beyond K at most ``tail_eps``."""
    n = _validate_n(n)
    if x < 0:
        raise ValueError("x must be nonnegative")
    k, _, _ = _poisson_weights(n * x, policy)
    return int(k[-1])


def sm_apply(n: int, f, x: float, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesValue:
    """Apply the Szasz-Mirakyan operator of index n to f at x.

    Evaluates ``sum_k exp(-nx) (nx)^k / k! * f(k/n)`` over k = 0..K with K
    chosen by :func:`truncation_index`.  Returns the truncated value and the
    omitted Poisson mass.
    """
    n = _validate_n(n)
    if x < 0:
        raise ValueError("x must be nonnegative")
    k, w, omitted = _poisson_weights(n * x, policy)
    vals = np.asarray(f(k / n), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = k[~np.isfinite(vals)][0] / n
        raise EvaluationError(f"non-finite series term at lattice point {bad}", x=bad)
    return SeriesValue(float(w @ vals), omitted)


def bernstein_apply(n: int, f, x: float) -> float:
    """Apply the Bernstein operator: the finite binomial average of f.

    ``sum_k C(n,k) x^k (1-x)^(n-k) f(k/n)`` for x in [0, 1], computed with
    log-space weights; exact point evaluations at the endpoints.
    """
    n = _validate_n(n)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"Bernstein operator requires x in [0, 1], got {x}")
    if x == 0.0:
        return float(f(0.0))
    if x == 1.0:
        return float(f(1.0))
    k = np.arange(n + 1)
    logw = (
        gammaln(n + 1.0)
        - gammaln(k + 1.0)
        - gammaln(n - k + 1.0)
        + k * np.log(x)
        + (n - k) * np.log1p(-x)
    )
    w = np.exp(logw)
    vals = np.asarray(f(k / n), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = k[~np.isfinite(vals)][0] / n
        raise EvaluationError(f"non-finite series term at lattice point {bad}", x=bad)
    return float(w @ vals)


def _negative_binomial_weights(n: int, x: float, policy: TruncationPolicy):
    """Negative-binomial weights C(n+k-1,k) x^k / (1+x)^(n+k) on 0..K.

    The initial window adds a geometric allowance on top of the usual
    deviation-based width: the tail decays only like (x/(1+x))^k, so for
    small n and large x it needs about (1+x) log(1/eps) extra terms.
    """
    if x == 0.0:
        return np.arange(1), np.array([1.0]), 0.0
    mean = n * x
    sd = np.sqrt(n * x * (1.0 + x))
    geometric = (1.0 + x) * max(0.0, np.log(1.0 / policy.tail_eps))
    hi = int(mean + 20.0 * sd + geometric + 60.0)
    while True:
        if hi + 1 > policy.max_terms:
            raise TruncationFailureError(
                f"series window for Baskakov mean {mean} needs more than "
                f"max_terms={policy.max_terms} terms"
            )
        k = np.arange(hi + 1)
        logw = (
            gammaln(n + k.astype(float))
            - gammaln(k + 1.0)
            - gammaln(float(n))
            + k * np.log(x)
            - (n + k) * np.log1p(x)
        )
        pmf = np.exp(logw)
        ratio = (n + hi) / (hi + 1.0) * x / (1.0 + x)
        result = _cut_at_tail(k, pmf, ratio, policy)
        if result is not None:
            return result
        hi *= 2


def baskakov_apply(n: int, f, x: float, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesValue:
    """Apply the Baskakov operator (negative-binomial average) to f at x.

    Experimental branch: its limiting behavior is only supported by a
    heuristic second-order coefficient, so none of the quantitative rate
    assertions elsewhere in the package rely on it.
    """
    n = _validate_n(n)
    if x < 0:
        raise ValueError("x must be nonnegative")
    k, w, omitted = _negative_binomial_weights(n, x, policy)
    vals = np.asarray(f(k / n), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = k[~np.isfinite(vals)][0] / n
        raise EvaluationError(f"non-finite series term at lattice point {bad}", x=bad)
    return SeriesValue(float(w @ vals), omitted)


def sm_exponential_closed_form(n: int, lam: float, x: float) -> float:
    """Closed form of the Szasz-Mirakyan operator on ``exp(-lam x)``.

    Equals ``exp(-n x (1 - exp(-lam/n)))``; as n grows the inner factor
    tends to lam, recovering the exponential itself.
    """
    n = _validate_n(n)
    if lam <= 0:
        raise ValueError("lam must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    # -expm1 keeps 1 - exp(-lam/n) accurate when lam/n is tiny
    return float(np.exp(-n * x * (-np.expm1(-lam / n))))


def sm_moment(n: int, p: int, x: float) -> float:
    """Raw moment E[T^p] of T ~ Poisson(n x), p in {1, 2, 3, 4}."""
    n = _validate_n(n)
    if x < 0:
        raise ValueError("x must be nonnegative")
    m = n * x
    if p == 1:
        return float(m)
    if p == 2:
        return float(m ** 2 + m)
    if p == 3:
        return float(m ** 3 + 3 * m ** 2 + m)
    if p == 4:
        return float(m ** 4 + 6 * m ** 3 + 7 * m ** 2 + m)
    raise ValueError(f"moment order p must be in {{1, 2, 3, 4}}, got {p}")


def sm_centered_fourth_moment_bound(n: int, x: float) -> float:
    """Exact value of E[(T/n - x)^4] for T ~ Poisson(n x).

    Equals ``3 x^2 / n^2 + x / n^3``; its square root controls the cubic
    remainder in the second-order expansion of the operator.
    """
    n = _validate_n(n)
    if x < 0:
        raise ValueError("x must be nonnegative")
    return float(3.0 * x ** 2 / n ** 2 + x / n ** 3)


def poisson_tail_bound(n: int, x: float, delta: float) -> float:
    """Exponential bound on P(|T/n - x| >= delta) for T ~ Poisson(n x).

    Returns ``2 exp(-n delta^2 / (2 (x + delta)))``.  The bound may exceed 1
    for small n; it is reported as-is and clipped only at reporting layers.
    """
    n = _validate_n(n)
    if x < 0:
        raise ValueError("x must be nonnegative")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return float(2.0 * np.exp(-n * delta ** 2 / (2.0 * (x + delta))))
