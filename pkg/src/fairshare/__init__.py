"""Fair-division share benchmarks, allocation search and extremal set-family checks."""

from .allocator import (
    Allocation,
    FeasibilityReport,
    brute_force_allocation,
    feasibility_report,
    find_fair_allocation,
    verify_allocation,
)
from .errors import CapabilityError, DomainError, FairShareError, InstanceFormatError, MalformedValuationError
from .instance import Instance, dump_instance, parse_instance
from .model import (
    Additive,
    Nonempty,
    Oracle,
    Table,
    Threshold,
    TwoBlock,
    UnitDemand,
    Valuation,
    ZeroOneValuation,
    evaluate,
    is_monotone,
    minimal_accepted,
    pad,
    reduce_01,
)
from .shares import (
    ShareSpec,
    ShareValue,
    ValueDistribution,
    compute_share,
    exact_distribution,
    left_quantile,
    mc_quantile_bracket,
    mms,
    proportional_share,
    quantile_share,
    rmms,
    thinned_quantile_share,
    thinning_budget,
)

__version__ = "0.1.0"
