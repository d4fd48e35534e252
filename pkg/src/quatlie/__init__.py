"""Quaternionic Lie algebra toolkit for controllability of g' = (A + uB) g on Sl(n, H)."""

from .quaternion import Quaternion, circle_conjugate, in_forbidden_union, qmul, split, tangent_pair
from .hmat import (
    HMatrix,
    bracket,
    complex_adjoint,
    hexp,
    random_algebra_element,
    random_group_element,
    study_det_abs,
    vectorize,
)
from .lie import ClosureUnstable, RootComponent, Subalgebra, ad_flow, generated_subalgebra, larc, root_decompose
from .certify import (
    CartanFrame,
    CartanFrameError,
    Certificate,
    Verdict,
    canonical_pair,
    certify,
    check_h2,
    check_h3,
    conjugate_system,
    diagonalize_cartan,
    sample_generic,
)
from .flow import ControlSignal, GrassmannPoint, flow, grassmann_act, grassmann_dist, reach_probe, simulate
from .wedge import (
    DecayTrace,
    orbit_tangent_rank,
    scaled_limit_trace,
    torus_cone_full,
    verify_conjugation_homotopy,
)

__all__ = [
    "Quaternion",
    "circle_conjugate",
    "in_forbidden_union",
    "qmul",
    "split",
    "tangent_pair",
    "HMatrix",
    "bracket",
    "complex_adjoint",
    "hexp",
    "random_algebra_element",
    "random_group_element",
    "study_det_abs",
    "vectorize",
    "ClosureUnstable",
    "RootComponent",
    "Subalgebra",
    "ad_flow",
    "generated_subalgebra",
    "larc",
    "root_decompose",
    "CartanFrame",
    "CartanFrameError",
    "Certificate",
    "Verdict",
    "canonical_pair",
    "certify",
    "check_h2",
    "check_h3",
    "conjugate_system",
    "diagonalize_cartan",
    "sample_generic",
    "ControlSignal",
    "GrassmannPoint",
    "flow",
    "grassmann_act",
    "grassmann_dist",
    "reach_probe",
    "simulate",
    "DecayTrace",
    "orbit_tangent_rank",
    "scaled_limit_trace",
    "torus_cone_full",
    "verify_conjugation_homotopy",
]

__version__ = "0.1.0"
