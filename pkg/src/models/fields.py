"""
Fields on the half-space slab: mollifiers, slab grids, the averaged field V
and the assembled extension U.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

REPROJECTED = 0
HOMOGENEOUS = 1
PROVENANCE_NAMES = {REPROJECTED: "reprojected", HOMOGENEOUS: "homogeneous"}


@dataclass
class Mollifier:
    """
    Radial polynomial mollifier phi(z) = sum_k c_k |z|^(2k) on the unit ball.

    Attributes:
        m: Domain dimension
        profile: Coefficients c_k of powers of |z|^2
        sup_bound: Verified sup|phi|
        grad_bound: Verified sup|D phi|
        integral: Verified integral of phi over R^m
    """
    m: int
    profile: Tuple[float, ...]
    sup_bound: float = 0.0
    grad_bound: float = 0.0
    integral: float = 0.0

    def __post_init__(self):
        if self.m not in (1, 2):
            raise ValueError(f"Mollifiers exist for m in (1, 2), got {self.m}")
        if not self.profile:
            raise ValueError("Mollifier profile cannot be empty")
        self.profile = tuple(float(c) for c in self.profile)

    @property
    def identifier(self) -> str:
        return f"radial-m{self.m}-" + "_".join(f"{c:.6g}" for c in self.profile)

    def radial(self, r) -> np.ndarray:
        """Profile as a function of the radius, zero outside the unit ball."""
        r = np.asarray(r, dtype=float)
        s = r * r
        value = np.polynomial.polynomial.polyval(s, self.profile)
        return np.where(r <= 1.0, value, 0.0)

    def radial_derivative(self, r) -> np.ndarray:
        """d phi / d r, zero outside the unit ball."""
        r = np.asarray(r, dtype=float)
        s = r * r
        ds = np.polynomial.polynomial.polyder(self.profile)
        value = 2 * r * np.polynomial.polynomial.polyval(s, ds) if len(ds) else np.zeros_like(r)
        return np.where(r <= 1.0, value, 0.0)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.m == 1 and (z.ndim == 0 or z.shape[-1] != 1):
            return self.radial(np.abs(z))
        return self.radial(np.linalg.norm(z, axis=-1))

    def to_dict(self):
        return {"m": self.m, "profile": list(self.profile), "sup_bound": self.sup_bound,
                "grad_bound": self.grad_bound, "integral": self.integral}


def _trapezoid(axis: np.ndarray) -> np.ndarray:
    weights = np.zeros_like(axis)
    gaps = np.diff(axis)
    weights[:-1] += gaps / 2
    weights[1:] += gaps / 2
    return weights


@dataclass
class SlabGrid:
    """
    Tensor grid over window^m x [h_min, h_max] in the upper half-space.

    Attributes:
        m: Boundary dimension
        horizontal: Node coordinates shared by every horizontal axis
        heights: Increasing node heights (a geometric ladder)
    """
    m: int
    horizontal: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        self.horizontal = np.asarray(self.horizontal, dtype=float)
        self.heights = np.asarray(self.heights, dtype=float)
        if self.m not in (1, 2):
            raise ValueError(f"Slab dimension m must be 1 or 2, got {self.m}")
        if np.any(np.diff(self.horizontal) <= 0) or np.any(np.diff(self.heights) <= 0):
            raise ValueError("Slab axes must be strictly increasing")
        if self.heights[0] <= 0:
            raise ValueError("Slab heights must be positive")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.horizontal.size,) * self.m + (self.heights.size,)

    @property
    def h_min(self) -> float:
        return float(self.heights[0])

    @property
    def h_max(self) -> float:
        return float(self.heights[-1])

    @property
    def window(self) -> float:
        return float(self.horizontal[-1])

    @property
    def axes(self) -> List[np.ndarray]:
        return [self.horizontal] * self.m + [self.heights]

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    def coordinates(self) -> np.ndarray:
        """All node coordinates in C order, shape (k, m + 1)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def cell_weights(self) -> np.ndarray:
        """Trapezoid volume weights per node, in grid shape."""
        weights = _trapezoid(self.heights)
        for _ in range(self.m):
            weights = np.multiply.outer(_trapezoid(self.horizontal), weights)
        return weights

    def floor_weights(self) -> np.ndarray:
        """Trapezoid weights of the horizontal grid, flattened in C order."""
        weights = _trapezoid(self.horizontal)
        result = weights
        for _ in range(self.m - 1):
            result = np.multiply.outer(result, weights)
        return result.ravel()

    def contains(self, points: np.ndarray, tolerance: float = 1e-12) -> np.ndarray:
        points = np.atleast_2d(points)
        inside = (points[:, -1] >= self.h_min - tolerance) & (points[:, -1] <= self.h_max + tolerance)
        for axis in range(self.m):
            inside &= np.abs(points[:, axis]) <= self.window + tolerance
        return inside

    def to_dict(self):
        return {"m": self.m, "window": self.window, "horizontal_nodes": int(self.horizontal.size),
                "h_min": self.h_min, "h_max": self.h_max, "height_levels": int(self.heights.size)}


@dataclass
class AveragedField:
    """
    Extension by averaging sampled on a slab grid.

    Attributes:
        slab: Grid the samples live on
        values: V at every node, shape slab.shape + (nu,)
        dist_field: dist(V, N) per node
        outside_tube: Nodes whose distance is only a sampled lower bound
        mollifier_id: Identifier of the mollifier used
        evaluate: Pointwise evaluator of V at arbitrary half-space points
    """
    slab: SlabGrid
    values: np.ndarray
    dist_field: Optional[np.ndarray] = None
    outside_tube: Optional[np.ndarray] = None
    mollifier_id: str = ""
    evaluate: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    quadrature_error: float = 0.0

    def __post_init__(self):
        if self.values.shape[:-1] != self.slab.shape:
            raise ValueError(f"Averaged field shape {self.values.shape[:-1]} does not match slab {self.slab.shape}")

    def sidecar(self):
        return {"slab": self.slab.to_dict(), "mollifier": self.mollifier_id,
                "quadrature_error": self.quadrature_error}


@dataclass
class ExtensionField:
    """
    Assembled extension U on the slab grid.

    Attributes:
        slab: Grid matching the averaged field
        values: U at every node, shape slab.shape + (nu,)
        provenance: REPROJECTED or HOMOGENEOUS per node
        singular_points: Barycentres of boxes with non-removable traces
        removable_points: Barycentres of boxes whose traces are removable
        winding_degrees: Winding degree of each singular trace (circle targets)
        boxes: Final homogeneous-extension boxes as (lower, upper) corners
    """
    slab: SlabGrid
    values: np.ndarray
    provenance: np.ndarray
    singular_points: List[np.ndarray] = field(default_factory=list)
    removable_points: List[np.ndarray] = field(default_factory=list)
    winding_degrees: List[int] = field(default_factory=list)
    boxes: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        if self.values.shape[:-1] != self.slab.shape or self.provenance.shape != self.slab.shape:
            raise ValueError("Extension values and provenance must match the slab shape")

    @property
    def singular_count(self) -> int:
        return len(self.singular_points)

    def provenance_counts(self):
        return {name: int(np.sum(self.provenance == code)) for code, name in PROVENANCE_NAMES.items()}

    def sidecar(self):
        return {
            "slab": self.slab.to_dict(),
            "singular_points": [p.tolist() for p in self.singular_points],
            "removable_points": [p.tolist() for p in self.removable_points],
            "winding_degrees": list(self.winding_degrees),
            "boxes": [[lo.tolist(), hi.tolist()] for lo, hi in self.boxes],
            "provenance": self.provenance_counts(),
        }


@dataclass
class Box:
    """
    Closed axis-aligned box in the upper half-space receiving one homogeneous
    extension with respect to its barycentre.

    Attributes:
        lower: Lower corner, shape (m + 1,)
        upper: Upper corner, shape (m + 1,)
        seeds: Number of seeds (bad cubes or escape regions) merged into it
    """
    lower: np.ndarray
    upper: np.ndarray
    seeds: int = 1

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).copy()
        self.upper = np.asarray(self.upper, dtype=float).copy()
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("Box corners must be vectors of equal length")
        if np.any(self.upper <= self.lower):
            raise ValueError(f"Box is degenerate: {self.lower.tolist()} .. {self.upper.tolist()}")

    @property
    def barycenter(self) -> np.ndarray:
        return (self.lower + self.upper) / 2

    @property
    def half_sizes(self) -> np.ndarray:
        return (self.upper - self.lower) / 2

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)

    def touches(self, other: "Box") -> bool:
        return bool(np.all(self.lower <= other.upper) and np.all(other.lower <= self.upper))

    def face_samples(self, axis: int, side: int, per_edge: int) -> np.ndarray:
        """per_edge^m points on the face normal to ``axis`` (side 0 lower, 1 upper)."""
        dim = self.lower.size
        ticks = [np.linspace(self.lower[a], self.upper[a], per_edge) for a in range(dim) if a != axis]
        grid = np.stack([g.ravel() for g in np.meshgrid(*ticks, indexing="ij")], axis=-1)
        value = self.upper[axis] if side else self.lower[axis]
        return np.insert(grid, axis, value, axis=1)

    def to_pair(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lower.copy(), self.upper.copy()
