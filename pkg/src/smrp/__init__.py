"""Simultaneous matching of humans to robot tour guides and routing of the robots."""

from .model import (Instance, InfeasibleError, Matching, ObjectiveBreakdown, Route, SizeGuardError,
                    Solution, StructureError, TimeDist, Violation, check_feasibility,
                    evaluate_objective, route_time_distribution, validate_instance)
from .stochastic import dist_sum, expected_overtime, monte_carlo_overtime
from .matching import build_cost_matrix, solve_matching
from .routing import build_demand, exact_routing, route_cost, solve_routing
from .lns import LnsConfig, LnsResult, initialize, lns_solve
from .exact import ExactResult, exact_solve
from .simulator import SimConfig, SimResult, parametric_study, simulate
from .generator import GeneratorParams, generate_instance

__version__ = "0.1.0"
