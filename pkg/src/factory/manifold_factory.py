"""
Factory for creating manifolds and model metrics from spec entities.
"""

import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import sympy as sp

from ..config.manifold_spec import ManifoldSpec, MetricSpec
from ..diagnostics.metrics import (AsymptoticallyEuclideanMetric, ConicalMetric, CoveringMetric, EuclideanMetric,
                                   FlatCylinderMetric, HyperbolicMetric, ModelMetric, WarpedCylinderMetric)
from ..loaders.map_io import load_point_cloud_csv
from ..models.errors import SpecificationError
from ..models.manifolds import (Circle, CliffordTorus, ConvexPatch, Cylinder, EmbeddedManifold, PointCloud,
                                Sphere, WarpedCylinder)
from ..models.warping import WarpingFunction

ManifoldBuilder = Callable[[ManifoldSpec, Dict[str, Any]], EmbeddedManifold]
MetricBuilder = Callable[[MetricSpec, Dict[str, Any]], ModelMetric]


def _warping(parameters: Dict[str, Any]) -> WarpingFunction:
    expression = parameters.get("warping")
    if not expression:
        raise SpecificationError("Warped cylinder needs a 'warping' expression in t")
    try:
        period = float(sp.sympify(str(parameters.get("period", 0))))
    except (sp.SympifyError, TypeError) as e:
        raise SpecificationError(f"Invalid warping period: {e}")
    return WarpingFunction(str(expression), period=period)


def _point_cloud(spec: ManifoldSpec, common: Dict[str, Any]) -> PointCloud:
    csv = spec.parameters.get("csv")
    if not csv:
        raise SpecificationError("Point cloud needs a 'csv' file parameter")
    path = Path(csv)
    if not path.is_absolute() and spec.source_path:
        path = Path(spec.source_path).parent / path
    points, frames = load_point_cloud_csv(path, int(spec.parameters.get("intrinsic_dim", 1)))
    return PointCloud(points, frames, **common)


class ManifoldFactory:
    """
    Factory for creating target manifolds and synthetic metrics by kind.
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self._kinds: Dict[str, ManifoldBuilder] = {
            "circle": lambda spec, common: Circle(radius=float(spec.parameters.get("radius", 1.0)), **common),
            "sphere": lambda spec, common: Sphere(radius=float(spec.parameters.get("radius", 1.0)), **common),
            "clifford_torus": lambda spec, common: CliffordTorus(
                radius_1=float(spec.parameters.get("radius_1", 1.0)),
                radius_2=float(spec.parameters.get("radius_2", 1.0)), **common),
            "cylinder": lambda spec, common: Cylinder(radius=float(spec.parameters.get("radius", 1.0)), **common),
            "warped_cylinder": lambda spec, common: WarpedCylinder(_warping(spec.parameters), **common),
            "convex_patch": lambda spec, common: ConvexPatch(spec.parameters.get("lower"),
                                                             spec.parameters.get("upper"), **common),
            "point_cloud": _point_cloud,
        }
        self._models: Dict[str, MetricBuilder] = {
            "euclidean": lambda spec, common: EuclideanMetric(int(spec.parameters.get("dimension", 2)), **common),
            "hyperbolic": lambda spec, common: HyperbolicMetric(int(spec.parameters.get("dimension", 2)), **common),
            "flat_cylinder": lambda spec, common: FlatCylinderMetric(float(spec.parameters.get("radius", 1.0)),
                                                                     **common),
            "warped_cylinder": lambda spec, common: WarpedCylinderMetric(
                _warping(spec.parameters), window=spec.window or 40.0,
                resolution=int(spec.parameters.get("resolution", 64)), metadata=common["metadata"]),
            "conical": lambda spec, common: ConicalMetric(float(spec.parameters.get("angle", math.pi)), **common),
            "asymptotically_euclidean": lambda spec, common: AsymptoticallyEuclideanMetric(
                float(spec.parameters.get("excess", 1.0)), float(spec.parameters.get("core_radius", 1.0)),
                **common),
            "covering": lambda spec, common: CoveringMetric(**common),
        }

    def create_manifold(self, spec: ManifoldSpec) -> EmbeddedManifold:
        """
        Create the manifold a spec describes.

        Raises:
            SpecificationError: If the kind is unknown or its parameters are invalid
        """
        if spec.kind not in self._kinds:
            raise SpecificationError(f"Unsupported manifold kind '{spec.kind}'. "
                                     f"Supported kinds: {self.get_supported_kinds()}")
        common: Dict[str, Any] = {"metadata": spec.metadata}
        if spec.truncation_window is not None:
            common["truncation_window"] = spec.truncation_window
        if spec.projection_backend is not None:
            common["projection_backend"] = spec.projection_backend
        if "membership" in spec.tolerances:
            common["tolerance"] = float(spec.tolerances["membership"])
        try:
            manifold = self._kinds[spec.kind](spec, common)
        except (TypeError, ValueError) as e:
            raise SpecificationError(f"Invalid parameters for {spec.kind}: {e}")
        self.logger.debug(f"Created manifold {manifold!r}")
        return manifold

    def create_metric(self, spec: MetricSpec) -> ModelMetric:
        """
        Create the model metric a spec describes.

        Raises:
            SpecificationError: If the model is unknown or its parameters are invalid
        """
        if spec.model not in self._models:
            raise SpecificationError(f"Unsupported metric model '{spec.model}'. "
                                     f"Supported models: {self.get_supported_models()}")
        common = {"window": spec.window, "metadata": spec.metadata}
        try:
            metric = self._models[spec.model](spec, common)
        except (TypeError, ValueError) as e:
            raise SpecificationError(f"Invalid parameters for {spec.model}: {e}")
        self.logger.debug(f"Created metric {metric}")
        return metric

    def metric_for(self, manifold: EmbeddedManifold) -> Optional[ModelMetric]:
        """Intrinsic model metric of a non-compact embedded manifold, when one is known."""
        if isinstance(manifold, WarpedCylinder):
            return WarpedCylinderMetric(manifold.warping, window=manifold.truncation_window,
                                        metadata=manifold.metadata)
        if isinstance(manifold, Cylinder):
            return FlatCylinderMetric(manifold.radius, metadata=manifold.metadata)
        if isinstance(manifold, ConvexPatch) and manifold.ambient_dim == 2:
            return EuclideanMetric(2, metadata=manifold.metadata)
        return None

    def register_kind(self, kind: str, builder: ManifoldBuilder) -> None:
        """
        Register a new manifold kind.

        Args:
            kind: Name used in spec files
            builder: Callable (spec, common kwargs) -> EmbeddedManifold
        """
        if not callable(builder):
            raise ValueError("Manifold builder must be callable")
        self._kinds[kind] = builder
        self.logger.info(f"Registered manifold kind: {kind}")

    def get_supported_kinds(self) -> list[str]:
        return list(self._kinds.keys())

    def get_supported_models(self) -> list[str]:
        return list(self._models.keys())

    def __str__(self) -> str:
        return f"ManifoldFactory(kinds={list(self._kinds.keys())})"

    def __repr__(self) -> str:
        return f"ManifoldFactory(kinds={list(self._kinds.keys())}, models={list(self._models.keys())})"
