"""
Discretized boundary maps u : X^m -> N.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import TailNotConstant
from .manifolds import EmbeddedManifold
from .meshes import StructuredMesh

TAIL_TOLERANCE = 1e-9


@dataclass
class SurfaceMap:
    """
    A boundary map sampled on a structured mesh.

    Attributes:
        name: Identifier of the map (used by repositories and reports)
        mesh: Structured mesh of the boundary domain
        values: Ambient points on the target manifold, shape (k, nu)
        manifold: Target manifold the values lie on
        tail_value: Constant value outside the window (plane domains)
        L_bound: Optional declared bound sup|u| <= L
        source: Optional callable evaluating the map at domain points
        tags: Free-form tags for map families
    """
    name: str
    mesh: StructuredMesh
    values: np.ndarray
    manifold: EmbeddedManifold
    tail_value: Optional[np.ndarray] = None
    L_bound: Optional[float] = None
    source: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    tags: List[str] = field(default_factory=list)

    def __post_init__(self):
        """Validate map data after initialization."""
        if not self.name or not self.name.strip():
            raise ValueError("Map name cannot be empty")

        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.mesh.node_count:
            raise ValueError(f"Map '{self.name}' needs one value per mesh node "
                             f"({self.mesh.node_count}), got shape {self.values.shape}")
        if self.values.shape[1] != self.manifold.ambient_dim:
            raise ValueError(f"Map '{self.name}' values live in R^{self.values.shape[1]}, "
                             f"target is in R^{self.manifold.ambient_dim}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"Map '{self.name}' has non-finite values")

        if self.L_bound is not None:
            if self.L_bound <= 0:
                raise ValueError("L_bound must be positive")
            excess = float(np.max(np.linalg.norm(self.values, axis=1)))
            if excess > self.L_bound * (1 + 1e-12):
                raise ValueError(f"Map '{self.name}' exceeds its declared bound: "
                                 f"sup|u| = {excess:.6g} > L = {self.L_bound}")

        if self.tail_value is not None:
            self.tail_value = np.asarray(self.tail_value, dtype=float).reshape(-1)
            if self.tail_value.shape[0] != self.manifold.ambient_dim:
                raise ValueError("Tail value must be an ambient point")
            if self.mesh.is_plane:
                edge = self.values[self.mesh.boundary_mask()]
                gap = np.max(np.linalg.norm(edge - self.tail_value, axis=1)) if edge.size else 0.0
                if gap > TAIL_TOLERANCE:
                    raise TailNotConstant(f"Map '{self.name}' differs from its tail value on the "
                                          f"window edge by {gap:.3g}")

        self.tags = [tag.strip() for tag in self.tags if tag and tag.strip()]

    @property
    def dimension(self) -> int:
        return self.mesh.dimension

    @property
    def domain(self) -> str:
        return self.mesh.domain

    def require_tail(self) -> np.ndarray:
        """
        Tail value of a plane-domain map.

        Raises:
            TailNotConstant: If the map carries no tail marker
        """
        if self.tail_value is None:
            raise TailNotConstant(f"Plane map '{self.name}' declares no constant tail")
        return self.tail_value

    def sup_norm(self) -> float:
        norms = np.linalg.norm(self.values, axis=1)
        if self.tail_value is not None:
            return float(max(norms.max(), np.linalg.norm(self.tail_value)))
        return float(norms.max())

    def restrict(self, mesh: StructuredMesh, indices: np.ndarray) -> "SurfaceMap":
        """The same map sampled on a sub-mesh whose nodes are ``indices`` of this mesh."""
        return SurfaceMap(self.name, mesh, self.values[indices], self.manifold,
                          tail_value=self.tail_value, L_bound=self.L_bound,
                          source=self.source, tags=list(self.tags))

    def resample(self, mesh: StructuredMesh) -> "SurfaceMap":
        """
        Evaluate the map's source on another mesh.

        Raises:
            ValueError: If the map has no source callable
        """
        if self.source is None:
            raise ValueError(f"Map '{self.name}' has no source and cannot be re-meshed")
        return SurfaceMap(self.name, mesh, self.source(mesh.points), self.manifold,
                          tail_value=self.tail_value, L_bound=self.L_bound,
                          source=self.source, tags=list(self.tags))

    def has_tag(self, tag: str) -> bool:
        """Check if the map has a specific tag."""
        return tag.lower() in [t.lower() for t in self.tags]

    def __str__(self) -> str:
        return f"SurfaceMap({self.name}: {self.domain} -> {self.manifold.kind})"

    def __repr__(self) -> str:
        return (f"SurfaceMap(name='{self.name}', domain='{self.domain}', nodes={self.mesh.node_count}, "
                f"target='{self.manifold.kind}', L_bound={self.L_bound}, tags={self.tags})")
