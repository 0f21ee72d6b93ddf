"""Predefined-time stability toolkit.

Regulator functions of a Lyapunov value, convergence classification and
settling-time bounds, a nonsingular predefined-time sliding mode
controller for second-order plants, fixed-step closed-loop simulation,
and seeded Monte Carlo campaigns over an initial-condition box.
"""

from .errors import (
    ConfigError,
    ConstructionError,
    DomainError,
    GainInversionError,
    NonFiniteStateError,
    OverflowGuardError,
    PretimeError,
    SingularGainError,
    StepSizeError,
    TooFewSamplesError,
)
from .montecarlo import (
    CampaignConfig,
    CampaignReport,
    ScenarioResult,
    report_to_json,
    run_campaign,
    sample_scenarios,
    summarize,
)
from .plant import PlantModel, State2, benchmark_plant, dynamics, get_plant, register_plant
from .regulator import KINDS, Direction, Regulator, make_regulator
from .sim import (
    SimConfig,
    Trajectory,
    integrate_batch,
    integrate_closed_loop,
    integrate_motivating,
    motivating_exact_time,
    settling_time,
)
from .smc import (
    SlidingDiagnostics,
    SurfaceParams,
    continuity_constants,
    control,
    phi,
    phi_dot,
    reaching_term,
    surface,
)
from .stability import (
    BoundReport,
    ConditionReport,
    ConvergenceCase,
    Violation,
    check_conditions,
    classify,
    required_decay,
    settling_bound,
    verify_trajectory,
)

__version__ = "0.1.0"
