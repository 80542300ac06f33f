"""Limit diffusions of the chain models and Monte Carlo semigroup estimates.

Two driftless diffusions appear as scaling limits of the lattice chains:

* the square-root diffusion dY = sqrt(Y) dW on [0, inf), absorbed at 0
  (the limit of the Poisson chain);
* the Wright-Fisher diffusion dX = sqrt(X(1-X)) dW on [0, 1], absorbed at
  both endpoints (the limit of the binomial chain).

For the square-root diffusion the transition law admits exact sampling as a
Poisson-mixed Gamma: N ~ Poisson(2x/t), then 0 if N = 0 else
Gamma(shape=N, scale=t/2).  This law is characterized by the Laplace
transform E[exp(-lam Y_t)] = exp(-lam x / (1 + lam t / 2)); it is a derived
construction, so the test suite validates it against an independent
Euler-Maruyama oracle (moments, extinction mass, and distributional
agreement) before anything else relies on it.  In particular E[Y_t] = x
(martingale), Var(Y_t) = x t, and P(Y_t = 0) = exp(-2x/t).

Euler schemes use full truncation: the state is clamped to the state space
after every increment, which preserves absorption at the degenerate
boundary.  The final step is shortened to land exactly on the horizon.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import UnsupportedMethodError
from .mc import MonteCarloEstimate, estimate_from, sample_across_workers
from .operators import poisson_tail_bound, sm_moment

CLAMP_ZERO = "clamp-zero"
CLAMP_UNIT = "clamp-unit"


@dataclass(frozen=True)
class EulerConfig:
    """Time step and boundary handling for an Euler-Maruyama path."""

    dt: float = 1e-3
    boundary_rule: str = CLAMP_ZERO

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.boundary_rule not in (CLAMP_ZERO, CLAMP_UNIT):
            raise ValueError(f"unknown boundary rule {self.boundary_rule!r}")


def feller_exact_terminal(
    x: float, t: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized exact draws of the square-root diffusion at time t from x."""
    if t <= 0:
        raise ValueError("t must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    out = np.zeros(size)
    if x == 0.0:
        return out
    counts = rng.poisson(2.0 * x / t, size=size)
    pos = counts > 0
    if np.any(pos):
        out[pos] = rng.gamma(shape=counts[pos], scale=t / 2.0)
    return out


def feller_exact_step(x: float, t: float, rng: np.random.Generator) -> float:
    """One exact draw of the square-root diffusion at time t started at x."""
    return float(feller_exact_terminal(x, t, 1, rng)[0])


def _euler_steps(T: float, dt: float):
    """Full steps of length dt followed by a shortened final step."""
    nfull = int(T / dt)
    rem = T - nfull * dt
    if rem > 1e-15 * max(1.0, T):
        return nfull, rem
    return nfull, 0.0


def feller_euler_terminal(
    x: float, T: float, dt: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Clamped Euler endpoints for dY = sqrt(Y) dW (vectorized over paths)."""
    if T <= 0:
        raise ValueError("T must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    y = np.full(size, float(x))
    nfull, rem = _euler_steps(T, dt)
    for _ in range(nfull):
        y = np.maximum(0.0, y + np.sqrt(y * dt) * rng.standard_normal(size))
    if rem > 0.0:
        y = np.maximum(0.0, y + np.sqrt(y * rem) * rng.standard_normal(size))
    return y


def feller_euler_path(
    x: float, T: float, config: EulerConfig, rng: np.random.Generator
) -> float:
    """Terminal value of one clamped Euler path of dY = sqrt(Y) dW."""
    if config.boundary_rule != CLAMP_ZERO:
        raise ValueError("the square-root diffusion uses the clamp-zero rule")
    return float(feller_euler_terminal(x, T, config.dt, 1, rng)[0])


def wf_euler_terminal(
    x: float, T: float, dt: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Clamped Euler endpoints for dX = sqrt(X(1-X)) dW on [0, 1]."""
    if T <= 0:
        raise ValueError("T must be positive")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"starting point must lie in [0, 1], got {x}")
    v = np.full(size, float(x))
    nfull, rem = _euler_steps(T, dt)
    for _ in range(nfull):
        v = np.clip(v + np.sqrt(v * (1.0 - v) * dt) * rng.standard_normal(size), 0.0, 1.0)
    if rem > 0.0:
        v = np.clip(v + np.sqrt(v * (1.0 - v) * rem) * rng.standard_normal(size), 0.0, 1.0)
    return v


def wf_euler_path(
    x: float, T: float, config: EulerConfig, rng: np.random.Generator
) -> float:
    """Terminal value of one clamped Euler path of the Wright-Fisher diffusion."""
    if config.boundary_rule != CLAMP_UNIT:
        raise ValueError("the Wright-Fisher diffusion uses the clamp-unit rule")
    return float(wf_euler_terminal(x, T, config.dt, 1, rng)[0])


def feller_semigroup_closed_form(lam: float, x: float, t: float) -> float:
    """E[exp(-lam Y_t)] for the square-root diffusion from x.

    Equals ``exp(-lam x / (1 + lam t / 2))``; serves as the oracle against
    which the exact sampler and the chain iterates are checked.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(np.exp(-lam * x / (1.0 + lam * t / 2.0)))


FELLER = "feller"
WRIGHT_FISHER = "wright-fisher"
METHOD_EXACT = "exact"
METHOD_EULER = "euler"


def semigroup_mc(
    kind: str,
    t: float,
    x: float,
    f,
    samples: int,
    seed: int,
    method: str = METHOD_EXACT,
    config: EulerConfig = None,
    workers=None,
) -> MonteCarloEstimate:
    """Monte Carlo estimate of E[f(terminal value at time t from x)].

    ``kind`` selects the diffusion ("feller" or "wright-fisher"); exact
    sampling is available only for the square-root diffusion.  t = 0 returns
    (f(x), 0) without consuming randomness.  Deterministic given
    (seed, samples, worker count).
    """
    if kind not in (FELLER, WRIGHT_FISHER):
        raise ValueError(f"unknown diffusion kind {kind!r}")
    if method not in (METHOD_EXACT, METHOD_EULER):
        raise ValueError(f"unknown method {method!r}")
    if kind == WRIGHT_FISHER and method == METHOD_EXACT:
        raise UnsupportedMethodError(
            "exact transition sampling is only implemented for the square-root diffusion"
        )
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return MonteCarloEstimate(mean=float(f(x)), stderr=0.0, samples=samples)
    if config is None:
        config = EulerConfig(
            boundary_rule=CLAMP_ZERO if kind == FELLER else CLAMP_UNIT
        )

    def draw(rng, m):
        if kind == FELLER and method == METHOD_EXACT:
            terminal = feller_exact_terminal(x, t, m, rng)
        elif kind == FELLER:
            terminal = feller_euler_terminal(x, t, config.dt, m, rng)
        else:
            terminal = wf_euler_terminal(x, t, config.dt, m, rng)
        return np.asarray(f(terminal), dtype=float)

    return estimate_from(sample_across_workers(draw, samples, seed, workers))


class ScaledMoments(NamedTuple):
    """Scaled one-step drift and squared-displacement of the Poisson chain."""

    mean_scaled: float
    var_scaled: float


def chain_scaling_moments(n: int, y: float) -> ScaledMoments:
    """Exact scaled one-step moments n E[G - y] and n E[(G - y)^2] at y = i/n.

    Here G = T/n with T ~ Poisson(n y).  Evaluated through the exact Poisson
    moment polynomials; the results are (0, y), the drift and diffusion
    coefficients the weak-convergence criterion requires.
    """
    if y < 0:
        raise ValueError("y must be nonnegative")
    i = round(y * n)
    if abs(y * n - i) > 1e-9:
        raise ValueError(f"{y} is not a lattice point i/{n}")
    if y == 0.0:
        return ScaledMoments(0.0, 0.0)
    m1 = sm_moment(n, 1, y)
    m2 = sm_moment(n, 2, y)
    mean_scaled = n * (m1 / n - y)
    var_scaled = n * (m2 / n ** 2 - 2.0 * y * m1 / n + y ** 2)
    return ScaledMoments(float(mean_scaled), float(var_scaled))


def chain_jump_probability_bound(n: int, y: float, delta: float) -> float:
    """Bound on the probability of a one-step chain jump larger than delta."""
    return poisson_tail_bound(n, y, delta)
