"""Conal distances, geodesics and spectral factorization for rational spectral densities."""
from .errors import (
    BoundaryRootError,
    ConvergenceError,
    DegenerateFrameError,
    DimensionError,
    GridMismatchError,
    InvalidInputError,
    NotNormalizedError,
    NotPositiveDefiniteError,
    PoleOnCircleError,
    SingularFeedthroughError,
    SingularResolventError,
    SpecGeoError,
    UnstableSystemError,
    UnsupportedRankError,
)
from .factorization import (
    FactoredSpectrum,
    ScalarFactor,
    is_minimum_phase,
    minimum_phase_factor,
    minimum_phase_factor_matrix,
    minimum_phase_factor_scalar,
    verify_factorization,
)
from .geodesics import (
    GeodesicSpec,
    finsler_geodesic,
    hilbert_geodesic,
    normalize_spectrum,
    riemannian_geodesic,
    trace_integral,
)
from .metrics import (
    DistanceResult,
    curve_length,
    finsler_norm_thompson,
    frobenius_divergence,
    gain_M,
    gain_m,
    hilbert_distance,
    hilbert_seminorm,
    riemannian_distance,
    thompson_distance,
)
from .norms import NormResult, h2_norm_sq, hinf_norm, linf_norm_grid
from .rational import (
    FrequencyGrid,
    LaurentPolynomial,
    SampledSpectrum,
    ScalarRationalSpectrum,
    StateSpace,
)

__version__ = "0.1.0"
