"""Hematopoiesis model with nonlinear harvesting and mixed delays: condition
checks, method-of-steps simulation, fixed-point construction of the pseudo
almost periodic solution, and stability experiments."""

from .analysis import attractor_experiment, extinction_experiment, fig2_scenario
from .dde_sim import ConstantHistory, ExpressionHistory, GridHistory, Trajectory, dense_eval, integrate, monitor, solve_dde
from .hypotheses import HypothesisReport, RateCertificate, check_all, extinction_condition, rate_bisect
from .model import HarvestSpec, ModelSpec, RangeParams, companion_point, flux, flux_derivative, max_delay, rhs
from .pap_funcs import PapFunction, bounds, bump_train, ergodic_mean, evaluate, parse_pap, sampled_extrema
from .pap_solver import PapSolution, crosscheck_forward, gamma_apply, picard_solve
from .scenario import Scenario, parse_scenario, serialize

__version__ = "0.1.0"
