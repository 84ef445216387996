"""Synthetic Lorentzian geometry: time separation, curve classes, model spaces,
geodesic shooting, conjugate point detectors and triangle comparison."""

from .comparison import (
    TimelikeTriangle,
    cartan_hadamard_experiment,
    curvature_bound_test,
    rauch_experiment,
    realize_triangle,
    stack_triangles,
)
from .conjugate import (
    build_family,
    classify,
    cut_scan,
    embeddability_check,
    injectivity_radii,
    jacobi_scan,
    one_sided_search,
    symmetric_search,
)
from .curves import SampledCurve, canonicalize, l_g_length, tau_length
from .frechet import d_gamma, discrete_frechet, frechet_refine, normalize_monotone
from .geodesic import (
    GeodesicSolution,
    convergence_experiment,
    converging_family,
    integrate_geodesic,
    local_maximizer_check,
    solve_bvp,
)
from .model import ModelSpace, model_tau_oracle, tau_model, timelike_diameter
from .space import PreLengthSpace, space_from_descriptor
from .spacetimes import ProductSpacetime, SmoothSpacetime

__version__ = "0.1.0"

__all__ = [
    "build_family",
    "canonicalize",
    "cartan_hadamard_experiment",
    "classify",
    "convergence_experiment",
    "converging_family",
    "curvature_bound_test",
    "cut_scan",
    "d_gamma",
    "discrete_frechet",
    "embeddability_check",
    "frechet_refine",
    "GeodesicSolution",
    "injectivity_radii",
    "integrate_geodesic",
    "jacobi_scan",
    "l_g_length",
    "local_maximizer_check",
    "model_tau_oracle",
    "ModelSpace",
    "normalize_monotone",
    "one_sided_search",
    "PreLengthSpace",
    "ProductSpacetime",
    "rauch_experiment",
    "realize_triangle",
    "SampledCurve",
    "SmoothSpacetime",
    "solve_bvp",
    "space_from_descriptor",
    "stack_triangles",
    "symmetric_search",
    "tau_length",
    "tau_model",
    "timelike_diameter",
    "TimelikeTriangle",
]
