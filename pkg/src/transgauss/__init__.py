"""Gauss map invariants for hypersurfaces of translational ambient spaces.

The package computes the invariant-frame Gauss map of a closed immersed
hypersurface, the expansion coefficients of its perturbed Jacobians along
a unit tangent field, the mapping degree those coefficients integrate to,
and the rank obstruction that rules out certain foliations. A small
scenario catalogue and a command-line front end sit on top.
"""

__version__ = "0.1.0"

from .ambients import (
    BergerGroupAmbient,
    EuclideanAmbient,
    FlatTorusAmbient,
    HyperbolicAmbient,
    TranslationalAmbient,
    covariant_derivative,
    invariant_field_derivative,
    make_ambient,
)
from .catalogue import THRESHOLDS, Scenario, catalogue_rows, evaluate_report, family_of, make_scenario
from .errors import (
    ConfigError,
    DegenerateBasisError,
    DimensionError,
    DomainError,
    IllConditionedFitError,
    ImmersionError,
    InconclusiveDegreeError,
    ParameterError,
    RetryWithDifferentValueError,
    TheoremContradictionError,
    TransgaussError,
)
from .foliation import (
    VERDICT_CONFIRMED,
    VERDICT_CONTRADICTION,
    VERDICT_VIOLATED,
    ObstructionReport,
    leaf_operator,
    mu_top_block,
    obstruction_check,
)
from .invariants import (
    DegreeEstimate,
    VerificationReport,
    degree,
    degree_by_preimage,
    gauss_map,
    mu_by_expansion,
    mu_by_fit,
    perturbed_gauss,
    pointwise_mu0,
    sphere_volume,
    v_independence_check,
    verify_main_theorem,
)
from .kernel import DEFAULT_DIFF, DiffConfig
from .surfaces import (
    CircleFactor,
    ImmersedHypersurface,
    ProductDomain,
    SphereFactor,
    UnitTangentField,
    adapted_basis,
    field_data,
    integrate,
    invariant_shape_operator,
    shape_operator,
    unit_normal,
)

__all__ = [
    "__version__",
    "TranslationalAmbient",
    "EuclideanAmbient",
    "FlatTorusAmbient",
    "BergerGroupAmbient",
    "HyperbolicAmbient",
    "make_ambient",
    "covariant_derivative",
    "invariant_field_derivative",
    "CircleFactor",
    "SphereFactor",
    "ProductDomain",
    "UnitTangentField",
    "ImmersedHypersurface",
    "unit_normal",
    "adapted_basis",
    "shape_operator",
    "invariant_shape_operator",
    "field_data",
    "integrate",
    "gauss_map",
    "perturbed_gauss",
    "mu_by_expansion",
    "mu_by_fit",
    "pointwise_mu0",
    "sphere_volume",
    "degree",
    "degree_by_preimage",
    "verify_main_theorem",
    "v_independence_check",
    "DegreeEstimate",
    "VerificationReport",
    "leaf_operator",
    "mu_top_block",
    "obstruction_check",
    "ObstructionReport",
    "VERDICT_CONFIRMED",
    "VERDICT_VIOLATED",
    "VERDICT_CONTRADICTION",
    "Scenario",
    "make_scenario",
    "catalogue_rows",
    "family_of",
    "THRESHOLDS",
    "evaluate_report",
    "DiffConfig",
    "DEFAULT_DIFF",
    "TransgaussError",
    "DimensionError",
    "DegenerateBasisError",
    "IllConditionedFitError",
    "ParameterError",
    "DomainError",
    "ImmersionError",
    "ConfigError",
    "InconclusiveDegreeError",
    "RetryWithDifferentValueError",
    "TheoremContradictionError",
]
