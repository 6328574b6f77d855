"""Hilbert geometries of convex bodies and their products."""
from .bodies import (
    Box,
    ChordTimes,
    ConvexBody,
    Ellipsoid,
    HPolytope,
    Interval,
    Orthant,
    Product,
    affine_image,
    body_from_dict,
    body_to_dict,
    bounding_box,
    chord_times,
    contains,
    cube,
    dilate,
    disk,
    load_body,
    sample_uniform,
    simplex,
)
from .errors import *  # noqa: F401,F403
from .measure import (
    BallVolumeEstimate,
    EntropyEstimate,
    SamplerSpec,
    entropy_additivity_report,
    entropy_estimate,
    fit_log_slope,
    hilbert_measure,
    metric_ball_volume,
)
from .metric import (
    DensityValue,
    QuadratureSpec,
    cross_ratio_distance,
    density,
    dual_norm,
    finsler_norm,
    tangent_ball_volume,
    unit_ball_volume,
)
from .spectral import ProductOf, RayleighResult, Tent, evaluate_test_function, fd_dual_gradient_norm, product_amenability_check, rayleigh_quotient
from .verify import SuiteReport

__version__ = "0.1.0"
