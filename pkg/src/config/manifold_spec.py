"""
Spec-file entities: embedded manifolds and synthetic model metrics.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

GROUP_GROWTHS = ("polynomial", "exponential", "unknown")


def _positive_float(value: Any, what: str) -> float:
    # YAML 1.1 reads exponent literals without a dot (1e-9) as strings
    if isinstance(value, bool):
        raise ValueError(f"{what} must be a positive number, got {value!r}")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{what} must be a positive number, got {value!r}")
    if not number > 0:
        raise ValueError(f"{what} must be a positive number, got {value!r}")
    return number


def _check_metadata(metadata: Dict[str, Any]) -> None:
    growth = metadata.get("fundamental_group_growth")
    if growth is not None and growth not in GROUP_GROWTHS:
        raise ValueError(f"fundamental_group_growth must be one of {GROUP_GROWTHS}, got '{growth}'")
    bounded = metadata.get("bounded_geometry")
    if bounded is not None and not isinstance(bounded, bool):
        raise ValueError(f"bounded_geometry must be a boolean, got {bounded!r}")
    if metadata.get("reach") is not None:
        metadata["reach"] = _positive_float(metadata["reach"], "Declared reach")


@dataclass
class ManifoldSpec:
    """
    Declarative description of an embedded target manifold.

    Attributes:
        kind: Manifold kind registered with the factory
        parameters: Constructor parameters of the kind
        truncation_window: Working window of non-compact kinds
        projection_backend: "analytic" or "sampled"; kind default when None
        tolerances: Optional {"membership": float}
        metadata: Declared facts (reach, bounded_geometry, fundamental_group_growth)
        source_path: File the spec was read from, for resolving relative paths
    """
    kind: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    truncation_window: Optional[float] = None
    projection_backend: Optional[str] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    source_path: Optional[str] = None

    def __post_init__(self):
        if not self.kind or not str(self.kind).strip():
            raise ValueError("Manifold spec needs a kind")
        self.kind = str(self.kind).strip()
        if not isinstance(self.parameters, dict):
            raise ValueError("Manifold parameters must be a mapping")
        if self.truncation_window is not None:
            self.truncation_window = float(self.truncation_window)
            if self.truncation_window <= 0:
                raise ValueError("Truncation window must be positive")
        self.tolerances = {name: _positive_float(value, f"Tolerance '{name}'")
                           for name, value in self.tolerances.items()}
        _check_metadata(self.metadata)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source_path: Optional[str] = None) -> "ManifoldSpec":
        unknown = set(data) - {"kind", "parameters", "truncation_window", "projection_backend",
                               "tolerances", "metadata"}
        if unknown:
            raise ValueError(f"Unknown manifold spec fields: {sorted(unknown)}")
        return cls(kind=data.get("kind", ""), parameters=dict(data.get("parameters") or {}),
                   truncation_window=data.get("truncation_window"),
                   projection_backend=data.get("projection_backend"),
                   tolerances=dict(data.get("tolerances") or {}),
                   metadata=dict(data.get("metadata") or {}), source_path=source_path)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "parameters": self.parameters, "truncation_window": self.truncation_window,
                "projection_backend": self.projection_backend, "tolerances": self.tolerances,
                "metadata": self.metadata}


@dataclass
class MetricSpec:
    """
    Declarative description of a synthetic model metric.

    Attributes:
        model: Model registered with the factory
        window: Working window (warped cylinders) or radius range bound
        parameters: Model parameters (e.g. warping expression, cone angle)
        metadata: Declared facts (bounded_geometry, fundamental_group_growth)
        radii: Optional explicit radius samples for the growth fit
    """
    model: str
    window: Optional[float] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    radii: Optional[list] = None

    def __post_init__(self):
        if not self.model or not str(self.model).strip():
            raise ValueError("Metric spec needs a model")
        self.model = str(self.model).strip()
        if self.window is not None:
            self.window = float(self.window)
            if self.window <= 0:
                raise ValueError("Metric window must be positive")
        if self.radii is not None:
            self.radii = [float(r) for r in self.radii]
        _check_metadata(self.metadata)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricSpec":
        unknown = set(data) - {"model", "window", "parameters", "metadata", "radii"}
        if unknown:
            raise ValueError(f"Unknown metric spec fields: {sorted(unknown)}")
        return cls(model=data.get("model", ""), window=data.get("window"),
                   parameters=dict(data.get("parameters") or {}),
                   metadata=dict(data.get("metadata") or {}), radii=data.get("radii"))

    def to_dict(self) -> Dict[str, Any]:
        return {"model": self.model, "window": self.window, "parameters": self.parameters,
                "metadata": self.metadata, "radii": self.radii}
