"""Global envelopes with intrinsic graphical interpretation.

Central regions, Monte Carlo and permutation global envelope tests,
combined envelopes over several test functions, composite-hypothesis
adjustment, functional ANOVA and general linear models, n-sample
distribution tests and functional boxplots.
"""

from .curves import Alternative, ArgGrid, CurveSet, JointInfo, create_curve_set, validate_joint
from .ranks import ContinuousRanks, PointwiseRanks, continuous_ranks, pointwise_ranks
from .measures import (
    MeasureResult,
    MeasureSpec,
    MeasureType,
    Orientation,
    area,
    compute_measure,
    cont,
    erl,
    extreme_rank,
    forder,
    qdir,
    st,
    unscaled,
)
from .envelope import (
    CombinedEnvelope,
    CriticalValue,
    GlobalEnvelope,
    central_region,
    combined_envelope,
    critical_value,
    global_envelope_test,
    hull_envelope,
    parametric_envelope,
    rank_envelope,
)
from .composite import (
    AdjustedResult,
    CompositeInput,
    adjusted_test,
    gaussian_ecdf_stages,
    gaussian_ecdf_test,
)
from .ftests import (
    DesignPair,
    Factor,
    FactorTable,
    FTestResult,
    build_design,
    frank_fanova,
    frank_flm,
    freedman_lane_permute,
    graph_fanova,
    graph_flm,
    rwise_F_oneway,
    scale_unequal_variances,
)
from .applications import FBoxplotResult, fboxplot, necdf_test
from . import datasets, errors, io

__version__ = "0.1.0"

__all__ = [
    "Alternative",
    "ArgGrid",
    "CurveSet",
    "JointInfo",
    "create_curve_set",
    "validate_joint",
    "PointwiseRanks",
    "ContinuousRanks",
    "pointwise_ranks",
    "continuous_ranks",
    "MeasureSpec",
    "MeasureType",
    "MeasureResult",
    "Orientation",
    "extreme_rank",
    "erl",
    "cont",
    "area",
    "qdir",
    "st",
    "unscaled",
    "compute_measure",
    "forder",
    "CriticalValue",
    "GlobalEnvelope",
    "CombinedEnvelope",
    "critical_value",
    "rank_envelope",
    "hull_envelope",
    "parametric_envelope",
    "central_region",
    "global_envelope_test",
    "combined_envelope",
    "CompositeInput",
    "AdjustedResult",
    "adjusted_test",
    "gaussian_ecdf_stages",
    "gaussian_ecdf_test",
    "Factor",
    "FactorTable",
    "DesignPair",
    "FTestResult",
    "build_design",
    "freedman_lane_permute",
    "scale_unequal_variances",
    "rwise_F_oneway",
    "graph_fanova",
    "frank_fanova",
    "graph_flm",
    "frank_flm",
    "FBoxplotResult",
    "fboxplot",
    "necdf_test",
    "datasets",
    "errors",
    "io",
    "__version__",
]
