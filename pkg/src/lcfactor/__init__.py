"""LC factorization of linear cameras and symmedian-point triangulation."""

from .affine import (
    AffineLCFactors,
    compose_affine,
    lc_factorize_affine,
    normalize_general_to_affine,
    two2three_affine,
)
from .errors import LCError
from .homgeom import (
    AxisPlane,
    CameraKind,
    CameraMatrix,
    camera_center,
    classify_camera,
    normalize_camera,
)
from .kernels import BACKEND
from .krt import KrtDecomposition, krt_decompose, krt_from_lc, rq3
from .pinhole import Mirror, PinholeLCFactors, compose, lc_factorize_pinhole, three2two, two2three
from .triangulate import Line3, SymmedianResult, midpoint_two_view, symmedian_point

__version__ = "0.1.0"


def lc_factorize(P, **options):
    """Factorize any linear camera, dispatching on its classification."""
    cam = P if isinstance(P, CameraMatrix) else CameraMatrix.from_array(P)
    if cam.kind is CameraKind.PINHOLE:
        return lc_factorize_pinhole(cam, **options)
    options.pop("focal_sign", None)
    return lc_factorize_affine(cam, **options)


__all__ = [
    "AffineLCFactors",
    "AxisPlane",
    "BACKEND",
    "CameraKind",
    "CameraMatrix",
    "KrtDecomposition",
    "LCError",
    "Line3",
    "Mirror",
    "PinholeLCFactors",
    "SymmedianResult",
    "camera_center",
    "classify_camera",
    "compose",
    "compose_affine",
    "krt_decompose",
    "krt_from_lc",
    "lc_factorize",
    "lc_factorize_affine",
    "lc_factorize_pinhole",
    "midpoint_two_view",
    "normalize_camera",
    "normalize_general_to_affine",
    "rq3",
    "symmedian_point",
    "three2two",
    "two2three",
    "two2three_affine",
]
