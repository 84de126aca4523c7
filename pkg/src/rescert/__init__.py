"""Residual-minimisation PDE solving with certified a posteriori error bounds.

The pieces, bottom to top: packed Taylor jets and geometry, closed-form
fields, Gauss-Legendre quadrature, a jet-propagating tanh network, ansatz
construction that satisfies Dirichlet data exactly, residual losses with
hand-derived gradients, full-batch Adam, and the certification layer that
turns a training loss into a Sobolev-norm error bound.
"""

from .ansatz import AnsatzSpec, build_spec
from .certify import (BoundViolation, CeaReport, CertifiedReport, c_reg_convex,
                      cea_decomposition, certified_h2_bound, interp_hs_bound,
                      parabolic_bound, penalty_h_half_estimator)
from .experiments import (ConfigError, ExperimentConfig, fit_ratio_slope,
                          harmonic_failure_records, load_config,
                          parse_config_text, run_certified, run_failure_demo,
                          run_fd_check, run_parabolic, run_penalty_vs_exact,
                          run_sobolev)
from .fields import AnalyticField, HarmonicMode, MatrixField, TimeExtendedField
from .geometry import Disk, Interval, Rectangle, SpaceTimeBox, distance_factor
from .jets import TaylorJet, coeff_layout, seed_point, seed_variable
from .losses import LossConfig, build_objective, loss_value, make_config
from .network import NetworkParams, forward_jets, load_params, save_params
from .problems import PdeProblem, builtin_problems, default_spec, get_problem
from .quadrature import (QuadratureRule, build_rule, h_half_surrogate,
                         integrate, sobolev_error, sobolev_errors_upto,
                         x_norm_error)
from .training import (AdamSchedule, DivergenceError, FdCheckReport, TrainState,
                       fd_check, train)

__version__ = "0.1.0"

__all__ = [
    "AdamSchedule", "AnalyticField", "AnsatzSpec", "BoundViolation",
    "CeaReport", "CertifiedReport", "ConfigError", "Disk", "DivergenceError",
    "ExperimentConfig", "FdCheckReport", "HarmonicMode", "Interval",
    "LossConfig", "MatrixField", "NetworkParams", "PdeProblem",
    "QuadratureRule", "Rectangle", "SpaceTimeBox", "TaylorJet",
    "TimeExtendedField", "TrainState", "build_objective", "build_rule",
    "build_spec", "builtin_problems", "c_reg_convex", "cea_decomposition",
    "certified_h2_bound", "coeff_layout", "default_spec", "distance_factor",
    "fd_check", "fit_ratio_slope", "forward_jets", "get_problem",
    "h_half_surrogate", "harmonic_failure_records", "integrate",
    "interp_hs_bound", "load_config", "load_params", "loss_value",
    "make_config", "parabolic_bound", "parse_config_text",
    "penalty_h_half_estimator", "run_certified", "run_failure_demo",
    "run_fd_check", "run_parabolic", "run_penalty_vs_exact", "run_sobolev",
    "save_params", "seed_point", "seed_variable", "sobolev_error",
    "sobolev_errors_upto", "train", "x_norm_error",
]
