"""
Builtin boundary maps addressable as ``builtin:<name>``.

Plane maps live on [-1, 1] with tail (1, 0) and take values on the unit
circle through an angle profile phi(x); sphere maps live on S^1 and are
constant around the north pole so they transport to the line.
"""

import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from ..models.manifolds import Circle, Cylinder, Sphere
from ..models.meshes import PLANE_R1_TAIL, PLANE_R2_TAIL, SPHERE_S1, build_mesh
from ..models.surface_map import SurfaceMap
from ..repository.map_family_repository import CALIBRATION_TAG, VALIDATION_TAG, MapFamilyRepository

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"
PLANE_WINDOW = 1.0
BUMP_SUPPORT = 0.9
SMALL_OSCILLATION = 0.05
STEP_HALF_WIDTH = 0.5
CAP_ANGLE = 0.5


def bump(x) -> np.ndarray:
    """C-infinity bump with peak 1 at 0 and support |x| < 1."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def smoothstep(z) -> np.ndarray:
    """C-infinity transition from 0 (z <= 0) to 1 (z >= 1)."""
    z = np.asarray(z, dtype=float)

    def e(v):
        return np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)

    return e(z) / (e(z) + e(1.0 - z))


def _angle_map(phi: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def plane_circle_map(name: str, profile: Callable[[np.ndarray], np.ndarray], resolution: int,
                     tags: List[str]) -> SurfaceMap:
    """Circle-valued map on [-1, 1] with angle profile phi(x) and tail (1, 0)."""

    def source(points):
        return _angle_map(profile(np.atleast_2d(points)[:, 0]))

    mesh = build_mesh(PLANE_R1_TAIL, resolution, window=PLANE_WINDOW)
    return SurfaceMap(name, mesh, source(mesh.points), Circle(1.0), tail_value=np.array([1.0, 0.0]),
                      L_bound=1.0, source=source, tags=tags)


def _step_profile(width: float) -> Callable[[np.ndarray], np.ndarray]:
    """Angle pi on |x| < 1/2 with transitions of the given width, 0 outside."""
    if width <= 0:
        return lambda x: np.where(np.abs(x) < STEP_HALF_WIDTH, math.pi, 0.0)
    rise = STEP_HALF_WIDTH + width / 2
    return lambda x: math.pi * smoothstep((x + rise) / width) * smoothstep((rise - x) / width)


def _ramp_profile(x: np.ndarray) -> np.ndarray:
    return 2 * math.pi * smoothstep(x + STEP_HALF_WIDTH)


def _north_angle(points: np.ndarray) -> np.ndarray:
    """Angle of S^1 points measured from the north pole, in [0, 2 pi)."""
    theta = np.arctan2(points[:, 1], points[:, 0])
    return np.mod(theta - math.pi / 2, 2 * math.pi)


def sphere_circle_map(name: str, profile: Callable[[np.ndarray], np.ndarray], resolution: int,
                      tags: List[str]) -> SurfaceMap:
    """Circle-valued map on S^1 with angle profile in the north angle psi."""

    def source(points):
        return _angle_map(profile(_north_angle(np.atleast_2d(points))))

    mesh = build_mesh(SPHERE_S1, resolution)
    return SurfaceMap(name, mesh, source(mesh.points), Circle(1.0), L_bound=1.0, source=source, tags=tags)


def identity_circle(resolution: int) -> SurfaceMap:
    mesh = build_mesh(SPHERE_S1, resolution)
    return SurfaceMap("identity_circle", mesh, mesh.points.copy(), Circle(1.0), L_bound=1.0,
                      source=lambda points: np.atleast_2d(points).copy(), tags=["degree-one", "smooth"])


def _cap_degree_one(psi: np.ndarray) -> np.ndarray:
    return 2 * math.pi * smoothstep((psi - CAP_ANGLE) / (2 * math.pi - 2 * CAP_ANGLE))


def _sphere_bump(psi: np.ndarray) -> np.ndarray:
    # bump centred at the south pole (psi = pi), vanishing within 1 rad of the north pole
    return 1.0 * bump((psi - math.pi) / (math.pi - 1.0))


def cylinder_bump(resolution: int) -> SurfaceMap:
    """Map into the unbounded cylinder with no declared bound."""
    manifold = Cylinder(1.0, truncation_window=4.0)

    def source(points):
        x = np.atleast_2d(points)[:, 0]
        phi = 0.5 * bump(x / BUMP_SUPPORT)
        return np.stack([np.cos(phi), np.sin(phi), 0.5 * bump(x / BUMP_SUPPORT)], axis=-1)

    mesh = build_mesh(PLANE_R1_TAIL, resolution, window=PLANE_WINDOW)
    return SurfaceMap("cylinder_bump", mesh, source(mesh.points), manifold,
                      tail_value=np.array([1.0, 0.0, 0.0]), source=source, tags=["smooth"])


def sphere_valued_2d(name: str, amplitude: float, resolution: int, tags: List[str]) -> SurfaceMap:
    """S^2-valued map on [-1, 1]^2 tilting the north pole by amplitude * bump(|x|)."""

    def source(points):
        points = np.atleast_2d(points)
        alpha = amplitude * bump(np.linalg.norm(points, axis=1) / BUMP_SUPPORT)
        return np.stack([np.sin(alpha), np.zeros_like(alpha), np.cos(alpha)], axis=-1)

    mesh = build_mesh(PLANE_R2_TAIL, resolution, window=PLANE_WINDOW)
    return SurfaceMap(name, mesh, source(mesh.points), Sphere(1.0), tail_value=np.array([0.0, 0.0, 1.0]),
                      L_bound=1.0, source=source, tags=tags)


def _bump_profile(amplitude: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: amplitude * bump(x / BUMP_SUPPORT)


BuiltinBuilder = Callable[[int], SurfaceMap]

BUILTIN_MAPS: Dict[str, BuiltinBuilder] = {
    "constant": lambda n: plane_circle_map("constant", lambda x: np.zeros_like(x), n,
                                           ["constant", CALIBRATION_TAG]),
    "small_oscillation": lambda n: plane_circle_map("small_oscillation", _bump_profile(SMALL_OSCILLATION), n,
                                                    ["smooth", VALIDATION_TAG]),
    "degree_one_ramp": lambda n: plane_circle_map("degree_one_ramp", _ramp_profile, n,
                                                  ["degree-one", "smooth", VALIDATION_TAG]),
    "sharp_antipodal_step": lambda n: plane_circle_map("sharp_antipodal_step", _step_profile(0.0), n, ["step"]),
    "identity_circle": identity_circle,
    "degree_one_cap": lambda n: sphere_circle_map("degree_one_cap", _cap_degree_one, n, ["degree-one", "smooth"]),
    "sphere_bump": lambda n: sphere_circle_map("sphere_bump", _sphere_bump, n, ["smooth"]),
    "cylinder_bump": cylinder_bump,
    "constant_2d": lambda n: sphere_valued_2d("constant_2d", 0.0, n, ["constant"]),
    "bump_2d": lambda n: sphere_valued_2d("bump_2d", 1.0, n, ["smooth"]),
}

_CALIBRATION_BUMPS: Tuple[float, ...] = (0.5, 1.0, 1.5)
_VALIDATION_BUMPS: Tuple[float, ...] = (0.75, 1.25)
_CALIBRATION_STEPS: Tuple[float, ...] = (0.4, 0.2, 0.1)
_VALIDATION_STEPS: Tuple[float, ...] = (0.3,)


def _register_families() -> None:
    for amplitudes, tag in ((_CALIBRATION_BUMPS, CALIBRATION_TAG), (_VALIDATION_BUMPS, VALIDATION_TAG)):
        for a in amplitudes:
            name = f"smooth_bump_{int(round(a * 100)):03d}"
            BUILTIN_MAPS[name] = (lambda n, name=name, a=a, tag=tag:
                                  plane_circle_map(name, _bump_profile(a), n, ["smooth", tag]))
    for widths, tag in ((_CALIBRATION_STEPS, CALIBRATION_TAG), (_VALIDATION_STEPS, VALIDATION_TAG)):
        for w in widths:
            name = f"smoothed_step_{int(round(w * 100)):03d}"
            BUILTIN_MAPS[name] = (lambda n, name=name, w=w, tag=tag:
                                  plane_circle_map(name, _step_profile(w), n, ["step", tag]))


_register_families()


def is_builtin(ref: str) -> bool:
    return bool(ref) and ref.startswith(BUILTIN_PREFIX)


def builtin_map(name: str, resolution: int) -> SurfaceMap:
    """
    Build a builtin map by name (with or without the ``builtin:`` prefix).

    Raises:
        ValueError: If the name is unknown
    """
    if name.startswith(BUILTIN_PREFIX):
        name = name[len(BUILTIN_PREFIX):]
    if name not in BUILTIN_MAPS:
        raise ValueError(f"Unknown builtin map '{name}'. Available: {sorted(BUILTIN_MAPS)}")
    surface_map = BUILTIN_MAPS[name](resolution)
    logger.debug(f"Built {surface_map!r}")
    return surface_map


def family_repository(resolution: int) -> MapFamilyRepository:
    """Repository holding every builtin map tagged for calibration or validation."""
    repository = MapFamilyRepository()
    for name in sorted(BUILTIN_MAPS):
        surface_map = BUILTIN_MAPS[name](resolution)
        if surface_map.has_tag(CALIBRATION_TAG) or surface_map.has_tag(VALIDATION_TAG):
            repository.add_map(surface_map)
    repository.check_disjoint()
    return repository
