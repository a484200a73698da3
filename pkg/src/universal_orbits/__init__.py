"""Universal orbits on mixing subshifts of finite type, computed exactly.

Glued points whose checkpoint empirical measures visit a net of periodic
measures, a residual-density scan over cylinders, and mean-cycle certificates
for diagonal cocycles.
"""

__version__ = "0.1.0"

from .errors import (
    BoundViolated,
    CoverageFailure,
    InadmissibleWord,
    InconsistentVerdicts,
    NotMixing,
    UniversalOrbitsError,
    Violation,
)
from .sft import (
    FULL_2_SHIFT,
    GOLDEN_MEAN,
    SFT,
    PeriodicOrbit,
    ScheduledPoint,
    admissible_words,
    connector,
    enumerate_periodic,
    parse_sft,
    shift_distance,
    validate_sft,
)
from .measures import (
    CylinderDistribution,
    LocalFunction,
    cylinder_marginals,
    empirical_measure,
    epsilon_net,
    periodic_measure,
    sigmund_approximate,
    weak_star_distance,
)
from .glue import (
    GluingSchedule,
    GluingTargetSequence,
    UniversalPoint,
    barycenter_connect,
    build_schedule,
    construct_universal_point,
    cycle_targets,
    eq6_bound,
    glue,
    verify_eq5,
    verify_step2,
    vfx_density_report,
)
from .genericity import build_ball_system, density_witness, pu_membership, residual_scan
from .hyperbolicity import (
    DiagonalCocycle,
    cao_check,
    irregular_detect,
    max_mean_cycle,
    min_mean_cycle,
    nuh_check,
    theorem2_pipeline,
    uniform_constants,
)

__all__ = [
    "BoundViolated",
    "CoverageFailure",
    "CylinderDistribution",
    "DiagonalCocycle",
    "FULL_2_SHIFT",
    "GOLDEN_MEAN",
    "GluingSchedule",
    "GluingTargetSequence",
    "InadmissibleWord",
    "InconsistentVerdicts",
    "LocalFunction",
    "NotMixing",
    "PeriodicOrbit",
    "SFT",
    "ScheduledPoint",
    "UniversalOrbitsError",
    "UniversalPoint",
    "Violation",
    "admissible_words",
    "barycenter_connect",
    "build_ball_system",
    "build_schedule",
    "cao_check",
    "connector",
    "construct_universal_point",
    "cycle_targets",
    "cylinder_marginals",
    "density_witness",
    "empirical_measure",
    "enumerate_periodic",
    "epsilon_net",
    "eq6_bound",
    "glue",
    "irregular_detect",
    "max_mean_cycle",
    "min_mean_cycle",
    "nuh_check",
    "parse_sft",
    "periodic_measure",
    "pu_membership",
    "residual_scan",
    "shift_distance",
    "sigmund_approximate",
    "theorem2_pipeline",
    "uniform_constants",
    "validate_sft",
    "verify_eq5",
    "verify_step2",
    "vfx_density_report",
    "weak_star_distance",
]
