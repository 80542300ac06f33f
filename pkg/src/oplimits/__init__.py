"""Positive lattice operators, their iterates, and their diffusion limits.

Three layers:

* single operator applications with explicit truncation budgets
  (:mod:`oplimits.operators`) over weighted function spaces
  (:mod:`oplimits.funcspace`);
* operator iterates, computed exactly through truncated transition kernels
  and stochastically through lattice Markov chains
  (:mod:`oplimits.iterates`), with the limiting degenerate generators and
  quantitative residuals (:mod:`oplimits.generator`);
* the limit diffusions with exact and Euler sampling
  (:mod:`oplimits.diffusion`), tied together by reproducible experiments
  and report emission (:mod:`oplimits.harness`, :mod:`oplimits.cli`).
"""

from .funcspace import (
    CATALOG,
    Grid,
    TestFunction,
    Weight,
    default_grid,
    lipschitz_estimate_d2,
    make_geometric_grid,
    second_derivative,
    weight_eval,
    weighted_sup_norm,
)
from .operators import (
    DEFAULT_POLICY,
    OperatorInstance,
    OperatorKind,
    SeriesValue,
    TruncationPolicy,
    baskakov_apply,
    bernstein_apply,
    poisson_tail_bound,
    sm_apply,
    sm_centered_fourth_moment_bound,
    sm_exponential_closed_form,
    sm_moment,
    truncation_index,
)
from .iterates import (
    ChainState,
    LatticeFunction,
    TransitionKernel,
    bernstein_kernel,
    build_sm_kernel,
    chain_expectation_mc,
    chain_sample_sm,
    chain_terminal_values,
    kelisky_rivlin_reference,
    kernel_iterate,
    lattice_cutoff,
)
from .generator import (
    GeneratorKind,
    MaxPrincipleResult,
    VoronovskayaReport,
    fit_rate,
    generator_apply,
    m_alpha,
    positive_max_principle_check,
    semigroup_rate_bound,
    voronovskaya_bound,
    voronovskaya_residual,
)
from .diffusion import (
    EulerConfig,
    ScaledMoments,
    chain_jump_probability_bound,
    chain_scaling_moments,
    feller_euler_path,
    feller_euler_terminal,
    feller_exact_step,
    feller_exact_terminal,
    feller_semigroup_closed_form,
    semigroup_mc,
    wf_euler_path,
    wf_euler_terminal,
)
from .mc import MonteCarloEstimate, ks_distance
from .errors import (
    ConfigError,
    CutoffTooSmallError,
    EvaluationError,
    TruncationFailureError,
    UnsupportedMethodError,
)

__version__ = "0.1.0"
