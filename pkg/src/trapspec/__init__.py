"""Computational spectral geometry of non-obtuse trapezoids.

Subpackages cover exact geometry and orbit catalogs, finite-element Laplace
spectra, heat-trace invariant extraction, billiard orbit enumeration,
wave-trace singularity probing, and spectrum-to-shape reconstruction.
"""

from . import errors
from .billiards import (
    ClosedGeodesic,
    ConicalChain,
    LengthSpectrum,
    compose_word,
    enumerate_orbits,
    find_generalized_diagonals,
    length_spectrum,
    poincare_map,
    shortest_orbit,
)
from .eigensolver import (
    DIRICHLET,
    NEUMANN,
    Spectrum,
    compute_spectrum,
    exact_rectangle_spectrum,
)
from .geometry import (
    Polygon,
    Trapezoid,
    angle_invariant,
    heat_corner_sum,
    new_trapezoid,
    orbit_catalog,
    random_trapezoid,
    vertices,
)
from .heat_trace import HeatInvariants, fit_invariants, heat_trace_partial
from .inverse import (
    Rectangle,
    ReconstructConfig,
    ReconstructionReport,
    check_isospectral_consistency,
    reconstruct_rectangle,
    scan_and_reconstruct,
    solve_from_h,
    solve_from_h_and_b,
    solve_from_h_and_lf,
    solve_from_lf_halpha,
)
from .wave_trace import (
    SingularityCandidate,
    classify_candidate,
    estimate_order,
    probe,
    scan_peaks,
)

__all__ = [
    "errors",
    "ClosedGeodesic",
    "ConicalChain",
    "LengthSpectrum",
    "compose_word",
    "enumerate_orbits",
    "find_generalized_diagonals",
    "length_spectrum",
    "poincare_map",
    "shortest_orbit",
    "DIRICHLET",
    "NEUMANN",
    "Spectrum",
    "compute_spectrum",
    "exact_rectangle_spectrum",
    "Polygon",
    "Trapezoid",
    "angle_invariant",
    "heat_corner_sum",
    "new_trapezoid",
    "orbit_catalog",
    "random_trapezoid",
    "vertices",
    "HeatInvariants",
    "fit_invariants",
    "heat_trace_partial",
    "Rectangle",
    "ReconstructConfig",
    "ReconstructionReport",
    "check_isospectral_consistency",
    "reconstruct_rectangle",
    "scan_and_reconstruct",
    "solve_from_h",
    "solve_from_h_and_b",
    "solve_from_h_and_lf",
    "solve_from_lf_halpha",
    "SingularityCandidate",
    "classify_candidate",
    "estimate_order",
    "probe",
    "scan_peaks",
]

__version__ = "0.1.0"
