"""Morning-commute bottleneck equilibria with parking and ride-sourcing.

A numpy/scipy library for the single-corridor morning commute shared by
private autos (parking-constrained), ride-sourcing vehicles (no parking
demand) and transit, including the system-cost-minimizing parking supply
and fleet size, with an exact fluid-queue simulator verifying every
closed form.
"""

from .errors import (
    AmbiguousPattern,
    CommuteqError,
    DivisionByZeroPopulation,
    FareDominance,
    InconsistentOutcome,
    NoConsistentPattern,
    NonPositiveCapacity,
    OrderingViolation,
    ParseError,
    PrecondModeMix,
    PrecondViolation,
    ValidationError,
    VerificationFailed,
)
from .scenario import (
    DerivedConstants,
    ScenarioParams,
    derive,
    dump_scenario,
    load_scenario,
    scale_money,
    validate,
)
from .bimodal import BimodalOutcome, auto_cost, departure_rates, equilibrium, transit_cost
from .multimodal import (
    MultimodalOutcome,
    Pattern,
    Timeline,
    solve,
    system_cost_delta,
    total_road_users,
)
from .reserved import ReservedOutcome
from . import bimodal, multimodal, policy, reserved, simulator
from .policy import PolicyResult, grid_oracle, optimal_fleet, optimal_parking, tc_derivatives
from .simulator import (
    DepartureProfile,
    Segment,
    SimTrace,
    VerificationReport,
    build_profile,
    realized_cost,
    simulate,
    verify,
)

__version__ = "0.1.0"
