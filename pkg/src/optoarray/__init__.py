"""Gaussian simulation of entanglement in arrays of optomechanical cavities.

Typical use::

    from optoarray import load_scenario, build_generator, steady_state
    sc = load_scenario("fig5a")
    ss = steady_state(build_generator(sc.network))
"""

from .dynamics import (
    CovarianceState,
    StabilityReport,
    analytic_stability_bounds,
    covariance_trajectory,
    evolve,
    initial_state,
    stability,
    steady_state,
)
from .entanglement import (
    NegativityResult,
    TwoModeBlock,
    extract_two_mode,
    log_negativity,
    log_negativity_series,
    mode_correlation,
)
from .errors import (
    EliminatedModelUnstable,
    NonPhysicalError,
    OptoarrayError,
    ScenarioError,
    TruncationError,
    UnstableError,
    ValidationError,
)
from .generator import ModeIndex, QuadraticGenerator, build_generator, mode_table, reference_generator
from .model import CavitySpec, CouplingKind, CouplingSpec, InitialState, NetworkSpec, Regime, validate
from .scenarios import Scenario, catalog, load_scenario, parse_scenario
from .sweep import AtTimes, MaxOverTime, Observables, SteadyState, SweepAxis, SweepSpec, run_sweep

__version__ = "0.1.0"
