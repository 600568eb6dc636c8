"""
Isometrically embedded target manifolds with positive reach.

Each kind provides a chart, its Jacobian, the declared intrinsic metric and,
where available, closed-form projection, distance and geodesic distance.
Kinds without closed forms (warped cylinders, point clouds) provide sampled
backends instead.
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import roots_legendre

from .errors import DegenerateTangent, NoConvergence, OutsideTube
from .warping import WarpingFunction

ANALYTIC_BACKEND = "analytic"
SAMPLED_BACKEND = "sampled"


def _as_points(z: np.ndarray, ambient_dim: int) -> np.ndarray:
    points = np.atleast_2d(np.asarray(z, dtype=float))
    if points.shape[-1] != ambient_dim:
        raise ValueError(f"Expected ambient dimension {ambient_dim}, got {points.shape[-1]}")
    return points


def _planar_angle(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unsigned angle between planar vectors, symmetric in its arguments."""
    cross = p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
    dot = p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1]
    return np.arctan2(np.abs(cross), dot)


class EmbeddedManifold(ABC):
    """
    Abstract isometric Euclidean embedding of a Riemannian manifold.

    Attributes:
        kind: Registry name of the manifold kind
        ambient_dim: Dimension nu of the ambient Euclidean space
        intrinsic_dim: Dimension n of the manifold
        is_compact: Whether the manifold is compact
        diameter: Intrinsic diameter, math.inf for non-compact kinds
        projection_backend: "analytic" or "sampled"
        tolerance: Membership tolerance in ambient length units
        truncation_window: Half-length of the working window of non-compact kinds
        metadata: Free-form metadata (declared reach, bounded geometry, ...)
    """

    kind = "abstract"

    def __init__(self, ambient_dim: int, intrinsic_dim: int, is_compact: bool,
                 diameter: float, projection_backend: str = ANALYTIC_BACKEND,
                 tolerance: float = 1e-9, truncation_window: Optional[float] = None,
                 metadata: Optional[Dict[str, Any]] = None):
        if ambient_dim < 1 or intrinsic_dim < 1:
            raise ValueError("Dimensions must be positive integers")
        if intrinsic_dim > 2:
            raise ValueError("Intrinsic dimension above 2 is not supported")
        if projection_backend not in (ANALYTIC_BACKEND, SAMPLED_BACKEND):
            raise ValueError(f"Unknown projection backend: {projection_backend}")
        self.ambient_dim = ambient_dim
        self.intrinsic_dim = intrinsic_dim
        self.is_compact = is_compact
        self.diameter = diameter
        self.projection_backend = projection_backend
        self.tolerance = tolerance
        self.truncation_window = truncation_window
        self.metadata = dict(metadata or {})
        self._reach_cache: Optional[float] = None

    # Chart and metric

    @abstractmethod
    def chart(self, params: np.ndarray) -> np.ndarray:
        """Map parameters of shape (k, n) to ambient points of shape (k, nu)."""
        pass

    @abstractmethod
    def chart_jacobian(self, params: np.ndarray) -> np.ndarray:
        """Jacobian of the chart, shape (k, nu, n)."""
        pass

    @abstractmethod
    def intrinsic_metric(self, params: np.ndarray) -> np.ndarray:
        """Declared metric tensor in chart coordinates, shape (k, n, n)."""
        pass

    @abstractmethod
    def parameter_grid(self, count: int) -> np.ndarray:
        """Structured parameter samples, roughly ``count`` of them."""
        pass

    @abstractmethod
    def exact_reach(self) -> Optional[float]:
        """Closed-form reach, or None when only sampled estimates exist."""
        pass

    def tangent_frame(self, params: np.ndarray) -> np.ndarray:
        """
        Orthonormal tangent frames at the given parameters.

        Returns:
            Array of shape (k, nu, n)

        Raises:
            DegenerateTangent: If the chart Jacobian is rank-deficient
        """
        jac = self.chart_jacobian(np.atleast_2d(params))
        singular = np.linalg.svd(jac, compute_uv=False)
        if np.any(singular[:, -1] <= 1e-10 * np.maximum(singular[:, 0], 1e-300)):
            bad = int(np.argmax(singular[:, -1] <= 1e-10 * singular[:, 0]))
            raise DegenerateTangent(f"Rank-deficient tangent frame for {self.kind} at sample {bad}")
        q, _ = np.linalg.qr(jac)
        return q

    def sample(self, count: int):
        """Return structured samples (points, frames, params)."""
        params = self.parameter_grid(count)
        return self.chart(params), self.tangent_frame(params), params

    def isometry_defect(self, params: np.ndarray, step: float = 1e-6) -> float:
        """
        Largest deviation between the finite-difference pullback metric and
        the declared intrinsic metric at the given parameters.
        """
        params = np.atleast_2d(np.asarray(params, dtype=float))
        columns = []
        for axis in range(self.intrinsic_dim):
            offset = np.zeros(self.intrinsic_dim)
            offset[axis] = step
            columns.append((self.chart(params + offset) - self.chart(params - offset)) / (2 * step))
        jac = np.stack(columns, axis=-1)
        pullback = np.einsum("kia,kib->kab", jac, jac)
        return float(np.max(np.abs(pullback - self.intrinsic_metric(params))))

    # Projection and distance

    def analytic_projection(self, z: np.ndarray) -> np.ndarray:
        """Closed-form nearest point; only valid inside the reach tube."""
        raise NotImplementedError(f"{self.kind} has no analytic projection")

    def analytic_distance(self, z: np.ndarray) -> np.ndarray:
        """Closed-form distance to the manifold, valid everywhere."""
        raise NotImplementedError(f"{self.kind} has no analytic distance")

    def analytic_geodesic(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Closed-form geodesic distance between broadcastable point arrays."""
        raise NotImplementedError(f"{self.kind} has no analytic geodesic distance")

    def sampled_projection(self, z: np.ndarray) -> np.ndarray:
        """Nearest point by the sampled backend (overridden per kind)."""
        raise NotImplementedError(f"{self.kind} has no sampled projection")

    def sampled_distance(self, z: np.ndarray) -> np.ndarray:
        """Best sampled distance to the manifold (an approximation from above)."""
        raise NotImplementedError(f"{self.kind} has no sampled distance")

    def parameter_domain(self):
        """
        Parameter box for lattice geodesics as (low, high, periodic) per axis.

        Returns None when the kind has no global chart suitable for a lattice.
        """
        return None

    def inverse_chart(self, points: np.ndarray) -> np.ndarray:
        """Chart parameters of points lying on the manifold."""
        raise NotImplementedError(f"{self.kind} has no inverse chart")

    @property
    def has_analytic_geodesic(self) -> bool:
        return type(self).analytic_geodesic is not EmbeddedManifold.analytic_geodesic

    def declared_reach(self) -> Optional[float]:
        """Reach from closed form or metadata, if either exists."""
        exact = self.exact_reach()
        if exact is not None:
            return exact
        declared = self.metadata.get("reach")
        return float(declared) if declared is not None else None

    def parameters(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        """Describe the manifold for reports."""
        return {
            "kind": self.kind,
            "ambient_dim": self.ambient_dim,
            "intrinsic_dim": self.intrinsic_dim,
            "parameters": self.parameters(),
            "projection_backend": self.projection_backend,
            "is_compact": self.is_compact,
            "diameter": None if math.isinf(self.diameter) else self.diameter,
            "truncation_window": self.truncation_window,
        }

    def __str__(self) -> str:
        return f"{self.kind}({self.parameters()})"

    def __repr__(self) -> str:
        return (f"{type(self).__name__}(parameters={self.parameters()}, "
                f"backend='{self.projection_backend}', window={self.truncation_window})")


class Circle(EmbeddedManifold):
    """Round circle of radius r in R^2, parameter theta."""

    kind = "circle"

    def __init__(self, radius: float = 1.0, **kwargs):
        if radius <= 0:
            raise ValueError("Circle radius must be positive")
        self.radius = float(radius)
        super().__init__(2, 1, True, math.pi * self.radius, **kwargs)

    def chart(self, params):
        theta = np.atleast_2d(params)[:, 0]
        return self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    def chart_jacobian(self, params):
        theta = np.atleast_2d(params)[:, 0]
        return self.radius * np.stack([-np.sin(theta), np.cos(theta)], axis=-1)[:, :, None]

    def intrinsic_metric(self, params):
        return np.full((np.atleast_2d(params).shape[0], 1, 1), self.radius ** 2)

    def parameter_grid(self, count):
        return (2 * np.pi * np.arange(count) / count)[:, None]

    def exact_reach(self):
        return self.radius

    def analytic_projection(self, z):
        z = _as_points(z, 2)
        return self.radius * z / np.linalg.norm(z, axis=-1, keepdims=True)

    def analytic_distance(self, z):
        z = _as_points(z, 2)
        return np.abs(np.linalg.norm(z, axis=-1) - self.radius)

    def analytic_geodesic(self, p, q):
        return self.radius * _planar_angle(p, q)

    def parameter_domain(self):
        return [(-np.pi, np.pi, True)]

    def inverse_chart(self, points):
        points = _as_points(points, 2)
        return np.arctan2(points[:, 1], points[:, 0])[:, None]

    def parameters(self):
        return {"radius": self.radius}


class Sphere(EmbeddedManifold):
    """Round sphere of radius r in R^3, parameters (polar, azimuth)."""

    kind = "sphere"

    def __init__(self, radius: float = 1.0, **kwargs):
        if radius <= 0:
            raise ValueError("Sphere radius must be positive")
        self.radius = float(radius)
        super().__init__(3, 2, True, math.pi * self.radius, **kwargs)

    def chart(self, params):
        params = np.atleast_2d(params)
        polar, azimuth = params[:, 0], params[:, 1]
        return self.radius * np.stack([np.sin(polar) * np.cos(azimuth),
                                       np.sin(polar) * np.sin(azimuth),
                                       np.cos(polar)], axis=-1)

    def chart_jacobian(self, params):
        params = np.atleast_2d(params)
        polar, azimuth = params[:, 0], params[:, 1]
        d_polar = np.stack([np.cos(polar) * np.cos(azimuth),
                            np.cos(polar) * np.sin(azimuth),
                            -np.sin(polar)], axis=-1)
        d_azimuth = np.stack([-np.sin(polar) * np.sin(azimuth),
                              np.sin(polar) * np.cos(azimuth),
                              np.zeros_like(polar)], axis=-1)
        return self.radius * np.stack([d_polar, d_azimuth], axis=-1)

    def intrinsic_metric(self, params):
        params = np.atleast_2d(params)
        metric = np.zeros((params.shape[0], 2, 2))
        metric[:, 0, 0] = self.radius ** 2
        metric[:, 1, 1] = (self.radius * np.sin(params[:, 0])) ** 2
        return metric

    def parameter_grid(self, count):
        n_polar = max(2, int(round(math.sqrt(count / 2))))
        n_azimuth = max(3, count // n_polar)
        polar = (np.arange(n_polar) + 0.5) * np.pi / n_polar
        azimuth = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
        grid = np.stack(np.meshgrid(polar, azimuth, indexing="ij"), axis=-1)
        return grid.reshape(-1, 2)

    def exact_reach(self):
        return self.radius

    def analytic_projection(self, z):
        z = _as_points(z, 3)
        return self.radius * z / np.linalg.norm(z, axis=-1, keepdims=True)

    def analytic_distance(self, z):
        z = _as_points(z, 3)
        return np.abs(np.linalg.norm(z, axis=-1) - self.radius)

    def analytic_geodesic(self, p, q):
        p, q = np.broadcast_arrays(p, q)
        cross = np.linalg.norm(np.cross(p, q), axis=-1)
        dot = np.sum(p * q, axis=-1)
        return self.radius * np.arctan2(cross, dot)

    def parameter_domain(self):
        # Pole rows collapse to single points; the lattice joins them with zero-length edges
        return [(0.0, np.pi, False), (-np.pi, np.pi, True)]

    def inverse_chart(self, points):
        points = _as_points(points, 3)
        polar = np.arccos(np.clip(points[:, 2] / np.linalg.norm(points, axis=-1), -1.0, 1.0))
        return np.stack([polar, np.arctan2(points[:, 1], points[:, 0])], axis=-1)

    def parameters(self):
        return {"radius": self.radius}


class CliffordTorus(EmbeddedManifold):
    """Flat torus S^1(r1) x S^1(r2) in R^4, parameters (alpha, beta)."""

    kind = "clifford_torus"

    def __init__(self, radius_1: float = 1.0, radius_2: float = 1.0, **kwargs):
        if radius_1 <= 0 or radius_2 <= 0:
            raise ValueError("Torus radii must be positive")
        self.radius_1 = float(radius_1)
        self.radius_2 = float(radius_2)
        diameter = math.pi * math.hypot(self.radius_1, self.radius_2)
        super().__init__(4, 2, True, diameter, **kwargs)

    def chart(self, params):
        params = np.atleast_2d(params)
        alpha, beta = params[:, 0], params[:, 1]
        return np.stack([self.radius_1 * np.cos(alpha), self.radius_1 * np.sin(alpha),
                         self.radius_2 * np.cos(beta), self.radius_2 * np.sin(beta)], axis=-1)

    def chart_jacobian(self, params):
        params = np.atleast_2d(params)
        alpha, beta = params[:, 0], params[:, 1]
        zeros = np.zeros_like(alpha)
        d_alpha = np.stack([-self.radius_1 * np.sin(alpha), self.radius_1 * np.cos(alpha), zeros, zeros], axis=-1)
        d_beta = np.stack([zeros, zeros, -self.radius_2 * np.sin(beta), self.radius_2 * np.cos(beta)], axis=-1)
        return np.stack([d_alpha, d_beta], axis=-1)

    def intrinsic_metric(self, params):
        metric = np.zeros((np.atleast_2d(params).shape[0], 2, 2))
        metric[:, 0, 0] = self.radius_1 ** 2
        metric[:, 1, 1] = self.radius_2 ** 2
        return metric

    def parameter_grid(self, count):
        n_side = max(3, int(round(math.sqrt(count))))
        angles = 2 * np.pi * np.arange(n_side) / n_side
        return np.stack(np.meshgrid(angles, angles, indexing="ij"), axis=-1).reshape(-1, 2)

    def exact_reach(self):
        return min(self.radius_1, self.radius_2)

    def analytic_projection(self, z):
        z = _as_points(z, 4)
        first = self.radius_1 * z[:, :2] / np.linalg.norm(z[:, :2], axis=-1, keepdims=True)
        second = self.radius_2 * z[:, 2:] / np.linalg.norm(z[:, 2:], axis=-1, keepdims=True)
        return np.concatenate([first, second], axis=-1)

    def analytic_distance(self, z):
        z = _as_points(z, 4)
        return np.hypot(np.linalg.norm(z[:, :2], axis=-1) - self.radius_1,
                        np.linalg.norm(z[:, 2:], axis=-1) - self.radius_2)

    def analytic_geodesic(self, p, q):
        p, q = np.broadcast_arrays(p, q)
        alpha = _planar_angle(p[..., :2], q[..., :2])
        beta = _planar_angle(p[..., 2:], q[..., 2:])
        return np.hypot(self.radius_1 * alpha, self.radius_2 * beta)

    def parameter_domain(self):
        return [(-np.pi, np.pi, True), (-np.pi, np.pi, True)]

    def inverse_chart(self, points):
        points = _as_points(points, 4)
        return np.stack([np.arctan2(points[:, 1], points[:, 0]),
                         np.arctan2(points[:, 3], points[:, 2])], axis=-1)

    def parameters(self):
        return {"radius_1": self.radius_1, "radius_2": self.radius_2}


class Cylinder(EmbeddedManifold):
    """Round cylinder S^1(r) x R in R^3 with axis along the last coordinate."""

    kind = "cylinder"

    def __init__(self, radius: float = 1.0, truncation_window: float = 10.0, **kwargs):
        if radius <= 0:
            raise ValueError("Cylinder radius must be positive")
        if truncation_window is None or truncation_window <= 0:
            raise ValueError("Cylinder requires a positive truncation window")
        self.radius = float(radius)
        super().__init__(3, 2, False, math.inf, truncation_window=float(truncation_window), **kwargs)

    def chart(self, params):
        params = np.atleast_2d(params)
        theta, t = params[:, 0], params[:, 1]
        return np.stack([self.radius * np.cos(theta), self.radius * np.sin(theta), t], axis=-1)

    def chart_jacobian(self, params):
        params = np.atleast_2d(params)
        theta = params[:, 0]
        zeros = np.zeros_like(theta)
        d_theta = np.stack([-self.radius * np.sin(theta), self.radius * np.cos(theta), zeros], axis=-1)
        d_t = np.stack([zeros, zeros, np.ones_like(theta)], axis=-1)
        return np.stack([d_theta, d_t], axis=-1)

    def intrinsic_metric(self, params):
        metric = np.zeros((np.atleast_2d(params).shape[0], 2, 2))
        metric[:, 0, 0] = self.radius ** 2
        metric[:, 1, 1] = 1.0
        return metric

    def parameter_grid(self, count):
        n_theta = max(4, int(round(math.sqrt(count))))
        n_t = max(2, count // n_theta)
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        t = np.linspace(-self.truncation_window, self.truncation_window, n_t)
        return np.stack(np.meshgrid(theta, t, indexing="ij"), axis=-1).reshape(-1, 2)

    def exact_reach(self):
        return self.radius

    def analytic_projection(self, z):
        z = _as_points(z, 3)
        radial = self.radius * z[:, :2] / np.linalg.norm(z[:, :2], axis=-1, keepdims=True)
        return np.concatenate([radial, z[:, 2:]], axis=-1)

    def analytic_distance(self, z):
        z = _as_points(z, 3)
        return np.abs(np.linalg.norm(z[:, :2], axis=-1) - self.radius)

    def analytic_geodesic(self, p, q):
        p, q = np.broadcast_arrays(p, q)
        angle = _planar_angle(p[..., :2], q[..., :2])
        return np.hypot(self.radius * angle, q[..., 2] - p[..., 2])

    def parameter_domain(self):
        return [(-np.pi, np.pi, True), (-self.truncation_window, self.truncation_window, False)]

    def inverse_chart(self, points):
        points = _as_points(points, 3)
        return np.stack([np.arctan2(points[:, 1], points[:, 0]), points[:, 2]], axis=-1)

    def parameters(self):
        return {"radius": self.radius}


class WarpedCylinder(EmbeddedManifold):
    """
    Warped product R x_f S^1 realized as the surface of revolution
    (f(t) cos theta, f(t) sin theta, a(t)) with a' = sqrt(1 - f'^2).

    The induced metric is exactly dt^2 + f(t)^2 dtheta^2, which requires
    0 < f and sup|f'| < 1 on the working window.
    """

    kind = "warped_cylinder"

    QUADRATURE_NODES = 16
    MERIDIAN_SAMPLES_PER_UNIT = 64
    NEWTON_ITERATIONS = 40
    PROJECTION_TOLERANCE = 1e-10

    def __init__(self, warping: WarpingFunction, truncation_window: float = 10.0, **kwargs):
        if truncation_window is None or truncation_window <= 0:
            raise ValueError("Warped cylinder requires a positive truncation window")
        kwargs.setdefault("projection_backend", SAMPLED_BACKEND)
        self.warping = warping
        super().__init__(3, 2, False, math.inf, truncation_window=float(truncation_window), **kwargs)

        check = np.linspace(-self.truncation_window, self.truncation_window, 8193)
        values = warping(check)
        slopes = np.abs(warping.derivative(check, 1))
        if np.min(values) <= 0:
            raise ValueError(f"Warping function must be positive on the window, min f = {np.min(values):.4g}")
        if np.max(slopes) >= 1:
            raise ValueError(f"Warping function needs sup|f'| < 1 to embed, found {np.max(slopes):.4g}")

        nodes, weights = roots_legendre(self.QUADRATURE_NODES)
        panels = max(4, int(math.ceil(self.truncation_window)))
        edges = np.arange(panels) / panels
        self._unit_nodes = (edges[:, None] + (nodes[None, :] + 1) / (2 * panels)).ravel()
        self._unit_weights = np.tile(weights / (2 * panels), panels)

        count = int(2 * self.truncation_window * self.MERIDIAN_SAMPLES_PER_UNIT) + 1
        self._meridian_t = np.linspace(-self.truncation_window, self.truncation_window, count)
        self._meridian = np.stack([warping(self._meridian_t), self.height(self._meridian_t)], axis=-1)
        self._meridian_tree = cKDTree(self._meridian)

    def height_slope(self, t):
        return np.sqrt(np.clip(1.0 - self.warping.derivative(t, 1) ** 2, 0.0, None))

    def height(self, t) -> np.ndarray:
        """Axial coordinate a(t) = integral of sqrt(1 - f'^2) from 0 to t."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        slopes = self.height_slope(flat[:, None] * self._unit_nodes[None, :])
        return (flat * (slopes @ self._unit_weights)).reshape(t.shape)

    def chart(self, params):
        params = np.atleast_2d(params)
        theta, t = params[:, 0], params[:, 1]
        radius = self.warping(t)
        return np.stack([radius * np.cos(theta), radius * np.sin(theta), self.height(t)], axis=-1)

    def chart_jacobian(self, params):
        params = np.atleast_2d(params)
        theta, t = params[:, 0], params[:, 1]
        radius = self.warping(t)
        slope = self.warping.derivative(t, 1)
        d_theta = np.stack([-radius * np.sin(theta), radius * np.cos(theta), np.zeros_like(t)], axis=-1)
        d_t = np.stack([slope * np.cos(theta), slope * np.sin(theta), self.height_slope(t)], axis=-1)
        return np.stack([d_theta, d_t], axis=-1)

    def intrinsic_metric(self, params):
        params = np.atleast_2d(params)
        metric = np.zeros((params.shape[0], 2, 2))
        metric[:, 0, 0] = self.warping(params[:, 1]) ** 2
        metric[:, 1, 1] = 1.0
        return metric

    def parameter_grid(self, count):
        mean_radius = float(np.mean(self.warping(self._meridian_t)))
        circumference = 2 * np.pi * mean_radius
        length = 2 * self.truncation_window
        n_theta = max(8, int(round(math.sqrt(count * circumference / length))))
        n_t = max(2, count // n_theta)
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        t = np.linspace(-self.truncation_window, self.truncation_window, n_t)
        return np.stack(np.meshgrid(theta, t, indexing="ij"), axis=-1).reshape(-1, 2)

    def exact_reach(self):
        return None

    def _meridian_coordinates(self, z):
        z = _as_points(z, 3)
        return np.stack([np.linalg.norm(z[:, :2], axis=-1), z[:, 2]], axis=-1)

    def sampled_distance(self, z):
        distances, _ = self._meridian_tree.query(self._meridian_coordinates(z))
        return distances

    def meridian_parameter(self, z) -> np.ndarray:
        """
        Parameter t of the nearest meridian point, by multi-start Newton
        minimization of the squared meridian distance seeded from the
        nearest meridian samples.

        Raises:
            OutsideTube: If the minimizer leaves the working window
        """
        planar = self._meridian_coordinates(z)
        _, seeds = self._meridian_tree.query(planar, k=3)
        seeds = np.atleast_2d(seeds)
        best_t = np.zeros(planar.shape[0])
        best_residual = np.full(planar.shape[0], np.inf)
        for column in range(seeds.shape[1]):
            t = self._meridian_t[seeds[:, column]].copy()
            for _ in range(self.NEWTON_ITERATIONS):
                t = np.clip(t, -self.truncation_window, self.truncation_window)
                f0 = self.warping(t)
                f1 = self.warping.derivative(t, 1)
                f2 = self.warping.derivative(t, 2)
                a0 = self.height(t)
                a1 = self.height_slope(t)
                a2 = -f1 * f2 / np.maximum(a1, 1e-12)
                r_rho = f0 - planar[:, 0]
                r_axis = a0 - planar[:, 1]
                gradient = f1 * r_rho + a1 * r_axis
                curvature = 1.0 + f2 * r_rho + a2 * r_axis
                step = gradient / np.where(curvature > 1e-6, curvature, 1.0)
                t = t - step
                if np.max(np.abs(step)) < 1e-14:
                    break
            residual = np.hypot(self.warping(t) - planar[:, 0], self.height(t) - planar[:, 1])
            better = residual < best_residual
            best_t[better] = t[better]
            best_residual[better] = residual[better]
        if np.any(np.abs(best_t) > self.truncation_window + 1e-9):
            raise OutsideTube(f"Nearest point leaves the working window |t| <= {self.truncation_window}")
        stationarity = (self.warping.derivative(best_t, 1) * (self.warping(best_t) - planar[:, 0])
                        + self.height_slope(best_t) * (self.height(best_t) - planar[:, 1]))
        if np.max(np.abs(stationarity), initial=0.0) > self.PROJECTION_TOLERANCE:
            raise NoConvergence(f"Meridian projection did not converge: "
                                f"stationarity defect {np.max(np.abs(stationarity)):.3g}")
        return best_t

    def sampled_projection(self, z):
        z = _as_points(z, 3)
        t = self.meridian_parameter(z)
        theta = np.arctan2(z[:, 1], z[:, 0])
        return self.chart(np.stack([theta, t], axis=-1))

    def parameter_domain(self):
        return [(-np.pi, np.pi, True), (-self.truncation_window, self.truncation_window, False)]

    def inverse_chart(self, points) -> np.ndarray:
        """Parameters (theta, t) of points on the surface."""
        points = _as_points(points, 3)
        return np.stack([np.arctan2(points[:, 1], points[:, 0]), self.meridian_parameter(points)], axis=-1)

    def parameters(self):
        return {"warping": self.warping.expression}


class ConvexPatch(EmbeddedManifold):
    """
    Closed axis-aligned box in R^nu with the identity embedding.

    Convex sets have infinite reach; geodesic distance equals chordal
    distance and the projection is coordinate clipping.
    """

    kind = "convex_patch"

    def __init__(self, lower, upper, **kwargs):
        self.lower = np.asarray(lower, dtype=float).ravel()
        self.upper = np.asarray(upper, dtype=float).ravel()
        if self.lower.shape != self.upper.shape or np.any(self.upper <= self.lower):
            raise ValueError("Convex patch needs lower < upper componentwise")
        dim = self.lower.size
        diameter = float(np.linalg.norm(self.upper - self.lower))
        super().__init__(dim, dim, True, diameter, **kwargs)

    def chart(self, params):
        return np.atleast_2d(np.asarray(params, dtype=float)).copy()

    def chart_jacobian(self, params):
        k = np.atleast_2d(params).shape[0]
        return np.broadcast_to(np.eye(self.ambient_dim), (k, self.ambient_dim, self.ambient_dim)).copy()

    def intrinsic_metric(self, params):
        return self.chart_jacobian(params)

    def parameter_grid(self, count):
        per_axis = max(2, int(round(count ** (1.0 / self.ambient_dim))))
        axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(self.lower, self.upper)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.ambient_dim)

    def exact_reach(self):
        return math.inf

    def analytic_projection(self, z):
        return np.clip(_as_points(z, self.ambient_dim), self.lower, self.upper)

    def analytic_distance(self, z):
        z = _as_points(z, self.ambient_dim)
        return np.linalg.norm(z - np.clip(z, self.lower, self.upper), axis=-1)

    def analytic_geodesic(self, p, q):
        p, q = np.broadcast_arrays(p, q)
        return np.linalg.norm(q - p, axis=-1)

    def parameter_domain(self):
        return [(lo, hi, False) for lo, hi in zip(self.lower, self.upper)]

    def inverse_chart(self, points):
        return _as_points(points, self.ambient_dim).copy()

    def parameters(self):
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}


class PointCloud(EmbeddedManifold):
    """
    Manifold known only through ambient samples with tangent frames.

    The chart parameter is the sample index; projection returns the nearest
    sample and geodesic distances come from a nearest-neighbour graph.
    """

    kind = "point_cloud"

    def __init__(self, points, frames, **kwargs):
        points = np.asarray(points, dtype=float)
        frames = np.asarray(frames, dtype=float)
        if points.ndim != 2 or frames.ndim != 3 or frames.shape[:2] != points.shape:
            raise ValueError("Point cloud needs points (k, nu) and frames (k, nu, n)")
        kwargs.setdefault("projection_backend", SAMPLED_BACKEND)
        self.points = points
        self.frames = frames
        extent = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
        super().__init__(points.shape[1], frames.shape[2], True, extent, **kwargs)
        self._tree = cKDTree(points)

    def _indices(self, params):
        return np.atleast_1d(np.asarray(params)).reshape(-1).astype(int)

    def chart(self, params):
        return self.points[self._indices(params)]

    def chart_jacobian(self, params):
        return self.frames[self._indices(params)]

    def intrinsic_metric(self, params):
        frames = self.chart_jacobian(params)
        return np.einsum("kia,kib->kab", frames, frames)

    def parameter_grid(self, count):
        count = min(count, self.points.shape[0])
        return np.linspace(0, self.points.shape[0] - 1, count).round().astype(int)[:, None]

    def exact_reach(self):
        return None

    def isometry_defect(self, params, step=1e-6):
        frames = self.tangent_frame(params)
        gram = np.einsum("kia,kib->kab", frames, frames)
        return float(np.max(np.abs(gram - np.eye(self.intrinsic_dim))))

    def sampled_distance(self, z):
        distances, _ = self._tree.query(_as_points(z, self.ambient_dim))
        return distances

    def sampled_projection(self, z):
        _, indices = self._tree.query(_as_points(z, self.ambient_dim))
        return self.points[indices]

    def parameters(self):
        return {"samples": int(self.points.shape[0])}
