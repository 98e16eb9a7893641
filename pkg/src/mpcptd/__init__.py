"""Multi-period p-center with relocations on time-dependent networks."""
from .errors import (
    AlignmentError,
    BudgetExceededError,
    CompletenessError,
    DomainError,
    FIFOError,
    IGPDerivationError,
    InfeasibleParametersError,
    InstanceError,
    InstanceFormatError,
    MalformedFunctionError,
    MPCPError,
    SchemaError,
    ValidationError,
)
from .igp import (
    Factorization,
    SpeedProfile,
    check_ranking_invariance,
    derive_igp,
    factorize,
    factorize_network,
    igp_traverse,
)
from .pcenter import PCenterResult, allocate, radius, solve_pcenter
from .planner import GainDAG, RelocationPlan, build_gain_dag, certify_plan, select_relocations
from .solver import MultiPeriodSolution, SolveReport, exact_small, lower_bound, solve
from .tdnet import (
    PiecewiseLinearTT,
    TDNetwork,
    TimeHorizon,
    WorstTimeTable,
    build_worst_table,
    check_fifo,
    evaluate_tt,
    worst_service_time,
)

__version__ = "0.1.0"
