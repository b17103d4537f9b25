"""Hardy nonlocality toolkit: closed-form behaviors, quantum simulation,
concave-cover rigidity analysis, and self-testing certification."""

__version__ = "0.1.0"

from .hardy import (  # noqa: F401
    GOLDEN,
    P_HARDY_MAX,
    Behavior,
    HardyPoint,
    MeasurementAngles,
    angles_from_point,
    check_hardy_constraints,
    check_hardy_form,
    hardy_behavior,
    hardy_state,
    is_local,
    omega_star,
    point_from_angles,
)
from .envelope import (  # noqa: F401
    ConcaveCover,
    GridSpec,
    NuObjective,
    Objective,
    RegionMask,
    build_cover,
    concavity_region,
    equality_region,
    lemma1_region,
    sweep_union,
)
from .blockdiag import (  # noqa: F401
    Block,
    BlockModel,
    build_global_model,
    isometry_extract,
    mixture_behavior,
    verify_lemma2,
)
from .selftest import Certificate, certificate_roundtrip_check, certify  # noqa: F401
