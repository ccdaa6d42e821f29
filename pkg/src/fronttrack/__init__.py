"""Front tracking with operator splitting for scalar balance laws
``u_t + f(u)_x = g(t, x, u)``.

The solver produces piecewise constant approximations together with an
event log; the analysis modules turn that log into balance measures,
traced discontinuities and one-sided Lipschitz diagnostics.
"""

from .bv import Profile, SignedAtomicMeasure1D, glimm_functional, total_variation
from .jumps import JumpFamily, trace_discontinuities
from .measures import Measures, build_measures, verify_measure_bounds
from .riemann import FluxModel, burgers, cubic, quartic, solve_riemann
from .scenario import Scenario, load_scenario, standard_scenario
from .splitting import SolverConfig, SourceModel, damping_source, gaussian_source, run
from .tracking import EventLog, FrontState, evolve

__version__ = "0.1.0"

__all__ = [
    "Profile", "SignedAtomicMeasure1D", "glimm_functional", "total_variation",
    "JumpFamily", "trace_discontinuities",
    "Measures", "build_measures", "verify_measure_bounds",
    "FluxModel", "burgers", "cubic", "quartic", "solve_riemann",
    "Scenario", "load_scenario", "standard_scenario",
    "SolverConfig", "SourceModel", "damping_source", "gaussian_source", "run",
    "EventLog", "FrontState", "evolve",
]
