"""shiftlab: a numerical laboratory for randomly shifted periodic curves.

Simulation of the shift-mixture observation model in the Fourier domain,
the matching nonparametric prior (random cutoff, Gaussian coefficients,
Dirichlet-process shift law), posterior MCMC, closed-form and Monte-Carlo
divergence estimators, and numerically audited certificates for the
constructive bounds behind the posterior-contraction analysis.
"""

from ._kernels import BACKEND
from .fourier import (
    H1,
    Hs,
    L2,
    FourierCurve,
    NormKind,
    evaluate,
    norm,
    project,
    shift_action,
)
from .measures import (
    Discrete,
    DPConfig,
    GridDensity,
    bin_mass,
    circle_dist,
    dp_sample,
    eta_merge,
    moment_match_discretize,
    trig_moments,
)
from .model import (
    Dataset,
    SimConfig,
    girsanov_log_ratio,
    mixture_log_density,
    simulate,
)
from .divergences import (
    DivergenceEstimate,
    gauss_hellinger,
    gauss_tv,
    mc_divergence,
    mc_m_delta,
)
from .priors import (
    Adaptive,
    NonAdaptive,
    PriorConfig,
    PriorDraw,
    lambda_pmf,
    sample_prior,
    sieve_indicator,
    xi_variance,
)
from .mcmc import ChainState, McmcConfig, gibbs_sweep, posterior_radius, run_chain
from .certificates import (
    BracketFamily,
    build_brackets,
    chi_square_bound,
    dirichlet_ball_mass,
    e_bounds_audit,
    rice_tail_experiment,
    verify_bracket,
)
from .study import StudyConfig, default_truth, emit_report, run_contraction_study

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # fourier
    "FourierCurve",
    "NormKind",
    "L2",
    "H1",
    "Hs",
    "shift_action",
    "norm",
    "project",
    "evaluate",
    # measures
    "Discrete",
    "GridDensity",
    "DPConfig",
    "circle_dist",
    "dp_sample",
    "eta_merge",
    "moment_match_discretize",
    "bin_mass",
    "trig_moments",
    # model
    "SimConfig",
    "Dataset",
    "simulate",
    "mixture_log_density",
    "girsanov_log_ratio",
    # divergences
    "DivergenceEstimate",
    "gauss_tv",
    "gauss_hellinger",
    "mc_divergence",
    "mc_m_delta",
    # priors
    "PriorConfig",
    "PriorDraw",
    "NonAdaptive",
    "Adaptive",
    "lambda_pmf",
    "xi_variance",
    "sample_prior",
    "sieve_indicator",
    # mcmc
    "McmcConfig",
    "ChainState",
    "gibbs_sweep",
    "run_chain",
    "posterior_radius",
    # certificates
    "BracketFamily",
    "build_brackets",
    "verify_bracket",
    "chi_square_bound",
    "rice_tail_experiment",
    "e_bounds_audit",
    "dirichlet_ball_mass",
    # study
    "StudyConfig",
    "default_truth",
    "run_contraction_study",
    "emit_report",
]
