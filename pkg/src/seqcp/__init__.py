"""seqcp: insertion-based sequence variables for constraint programming.

A small CP solver built around a reversible sequence domain for routing:
sequence variables with an O(n²) insertion encoding, global constraints
(distance, transition times, precedence, cumulative capacity), insertion
branching, large neighborhood search, and a dial-a-ride solver with a CLI.
"""

from seqcp.constraints import (
    ActivitySet,
    Cumulative,
    Distance,
    DistanceMatrix,
    Precedence,
    TransitionTimes,
)
from seqcp.darp import (
    DarpInstance,
    DarpModel,
    GapProfile,
    InstanceFormatError,
    Request,
    Solution,
    build_model,
    gap_profile,
    insertion_cost,
    parse_instance,
    render_solution,
    solve,
    validate,
)
from seqcp.engine import (
    BoolEquals,
    BoolVisitView,
    Decision,
    IntDomain,
    LessEqualOffset,
    Propagator,
    SearchStats,
    Solver,
    StopSearch,
    SumBoolsEquals,
    SumEquals,
)
from seqcp.search import (
    FailDecision,
    InsertDecision,
    InsertPairDecision,
    LnsResult,
    NotBetweenDecision,
    binary_branching,
    darp_branching,
    first_solution,
    lns_solve,
    two_step_branching,
)
from seqcp.sequence import SequenceDomain
from seqcp.state import Inconsistency, Trail

__all__ = [
    "ActivitySet",
    "BoolEquals",
    "BoolVisitView",
    "Cumulative",
    "DarpInstance",
    "DarpModel",
    "Decision",
    "Distance",
    "DistanceMatrix",
    "FailDecision",
    "GapProfile",
    "Inconsistency",
    "InsertDecision",
    "InsertPairDecision",
    "InstanceFormatError",
    "IntDomain",
    "LessEqualOffset",
    "LnsResult",
    "NotBetweenDecision",
    "Precedence",
    "Propagator",
    "Request",
    "SearchStats",
    "SequenceDomain",
    "Solution",
    "Solver",
    "StopSearch",
    "SumBoolsEquals",
    "SumEquals",
    "Trail",
    "TransitionTimes",
    "binary_branching",
    "build_model",
    "darp_branching",
    "first_solution",
    "gap_profile",
    "insertion_cost",
    "lns_solve",
    "parse_instance",
    "render_solution",
    "solve",
    "two_step_branching",
    "validate",
]

__version__ = "0.1.0"
