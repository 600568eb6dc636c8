"""
Report value objects emitted by the numerical modules.

Each report serializes to plain JSON-compatible dictionaries through
``to_dict`` with floats rounded to a fixed number of significant digits so
that deterministic runs produce byte-identical files.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

REPORT_DIGITS = 12

POLYNOMIAL = "polynomial"
EXPONENTIAL = "exponential"
INCONCLUSIVE = "inconclusive"

VERDICT_YES = "yes"
VERDICT_NO = "no"
VERDICT_UNKNOWN = "unknown"


def clean(value: Any) -> Any:
    """Convert numpy scalars and arrays to rounded JSON-compatible values."""
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value == 0.0:
            return 0.0
        return float(f"{value:.{REPORT_DIGITS}g}")
    return value


@dataclass
class ReachEstimate:
    """
    Sampled Federer reach.

    Attributes:
        value: Infimum of the Federer quotient over sampled pairs
        sample_count: Number of sample points used
        monotone_history: (sample_count, value) pairs for nested sample sets
        exact: Closed-form reach when the kind has one
    """
    value: float
    sample_count: int
    monotone_history: List[Tuple[int, float]] = field(default_factory=list)
    exact: Optional[float] = None

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"Reach must be positive, got {self.value}")
        values = [v for _, v in self.monotone_history]
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("Reach history must be nonincreasing in sample count")

    @property
    def delta_N(self) -> float:
        """Half the reach, the tube radius used by the construction."""
        return self.value / 2

    def to_dict(self):
        return clean({
            "value": self.value,
            "sample_count": self.sample_count,
            "monotone_history": [list(item) for item in self.monotone_history],
            "exact": self.exact,
            "delta_N": self.delta_N,
        })


@dataclass
class ComparabilityConstant:
    """Bound d(p, q) <= K |p - q| on the part of N inside the 2L-ball."""
    K: float
    L: float
    sample_count: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"Comparability constant must be >= 1, got {self.K}")
        if self.L <= 0:
            raise ValueError("L must be positive")

    def to_dict(self):
        return clean({"K": self.K, "L": self.L, "sample_count": self.sample_count})


@dataclass
class EnergyReport:
    """
    Gagliardo energy, truncated energy and gap potential of one map.

    Attributes:
        gagliardo: Richardson-corrected critical Gagliardo energy
        truncated: Pair sum restricted to value distances >= delta
        gap_potential: Kernel |x - y|^(-2m) restricted to value distances >= delta
        delta: Threshold used for the truncated quantities
        quadrature_error_estimate: Refinement-based error estimate
        pair_sum: Raw pair sum at the finest mesh
        divergent: Whether refinement flagged the energy as infinite
        refinement_history: Pair sums from the finest mesh to the coarsest
    """
    gagliardo: float
    truncated: float
    gap_potential: float
    delta: float
    quadrature_error_estimate: float
    pair_sum: float = 0.0
    divergent: bool = False
    refinement_history: List[float] = field(default_factory=list)
    dimension: int = 1
    nodes: int = 0

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("Delta must be positive")
        if not self.divergent and self.truncated > self.gagliardo:
            raise ValueError(f"Truncated energy {self.truncated} exceeds the full energy {self.gagliardo}")

    def to_dict(self):
        return clean({
            "gagliardo": self.gagliardo,
            "truncated": self.truncated,
            "gap_potential": self.gap_potential,
            "delta": self.delta,
            "quadrature_error_estimate": self.quadrature_error_estimate,
            "pair_sum": self.pair_sum,
            "divergent": self.divergent,
            "refinement_history": self.refinement_history,
            "dimension": self.dimension,
            "nodes": self.nodes,
        })


@dataclass
class DistributionReport:
    """
    Distribution function t -> mu(t) of |DU| and the derived norms.

    Attributes:
        thresholds: Increasing positive thresholds t
        mu: Measure of {|DU| >= t} at each threshold
        weak_norm: Exact sup_t t^(m+1) mu(t) over the sampled gradient values
        w11_norm: Integral of |DU|
        strong_norm: Integral of |DU|^(m+1)
        dirichlet: Integral of |DU|^2
        singular_dirichlet: Integral of |DU|^2 over the boxes around singular points
        singular_count: Number of non-removable singular points
        measure: "lebesgue" or "hyperbolic"
        support_measure: Total measure of the sampled region, mu at t = 0
        collar: Excluded boundary collar for hyperbolic measures
    """
    thresholds: np.ndarray
    mu: np.ndarray
    weak_norm: float
    w11_norm: float
    strong_norm: float
    dirichlet: float
    singular_count: int
    layer_cake: float = 0.0
    support_measure: float = 0.0
    measure: str = "lebesgue"
    collar: Optional[float] = None
    dimension: int = 1
    singular_dirichlet: float = 0.0

    def __post_init__(self):
        if self.mu.shape != self.thresholds.shape:
            raise ValueError("Thresholds and mu must have equal length")
        if np.any(np.diff(self.mu) > 0):
            raise ValueError("Distribution function must be nonincreasing")

    def to_dict(self):
        return clean({
            "measure": self.measure,
            "collar": self.collar,
            "dimension": self.dimension,
            "weak_norm": self.weak_norm,
            "w11_norm": self.w11_norm,
            "layer_cake": self.layer_cake,
            "support_measure": self.support_measure,
            "strong_norm": self.strong_norm,
            "dirichlet": self.dirichlet,
            "singular_dirichlet": self.singular_dirichlet,
            "singular_count": self.singular_count,
            "thresholds": self.thresholds,
            "mu": self.mu,
        })


@dataclass
class EstimateVerification:
    """
    Fitted constants of the weak-norm estimate and per-map slack.

    The general bound is lhs <= A exp(B energy) energy; the bounded bound
    uses the gap potential in the exponent with B'.
    """
    mode: str
    fitted_A: float
    fitted_B: float
    reach_used: float
    lhs_weak_norm: Dict[str, float] = field(default_factory=dict)
    energy: Dict[str, float] = field(default_factory=dict)
    gap: Optional[Dict[str, float]] = None
    calibration_slack: Dict[str, float] = field(default_factory=dict)
    validation_slack: Dict[str, float] = field(default_factory=dict)
    linear_regime: bool = False
    compact_exponent: Optional[float] = None

    def holds(self) -> bool:
        slacks = list(self.calibration_slack.values()) + list(self.validation_slack.values())
        return all(s >= -1e-9 for s in slacks)

    def to_dict(self):
        return clean({
            "mode": self.mode,
            "fitted_A": self.fitted_A,
            "fitted_B": self.fitted_B,
            "reach_used": self.reach_used,
            "lhs_weak_norm": self.lhs_weak_norm,
            "energy": self.energy,
            "gap": self.gap,
            "calibration_slack": self.calibration_slack,
            "validation_slack": self.validation_slack,
            "linear_regime": self.linear_regime,
            "compact_exponent": self.compact_exponent,
            "holds": self.holds(),
        })


@dataclass
class GrowthFit:
    """
    Volume growth of geodesic balls and its classification.

    Attributes:
        radii: Increasing positive radii
        volumes: Ball volumes, shape (base_points, radii)
        fitted_degree: Rounded log-log tail slope
        slope: Least-squares log-log tail slope
        fit_residual: RMS residual of the tail fit
        classification: polynomial, exponential or inconclusive
        envelope: (c, c0) of the dominating envelope c R^deg + c0
    """
    radii: np.ndarray
    volumes: np.ndarray
    fitted_degree: int
    slope: float
    fit_residual: float
    classification: str
    envelope: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.classification not in (POLYNOMIAL, EXPONENTIAL, INCONCLUSIVE):
            raise ValueError(f"Unknown growth classification: {self.classification}")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("Radii must be strictly increasing")
        if np.any(np.diff(self.volumes, axis=-1) < -1e-9 * np.abs(self.volumes[..., 1:])):
            raise ValueError("Volumes must be nondecreasing in the radius")

    def envelope_value(self, radius) -> np.ndarray:
        c, c0 = self.envelope
        return c * np.asarray(radius, dtype=float) ** self.fitted_degree + c0

    def dominates(self) -> bool:
        """Re-check that the envelope dominates every sample at every base point."""
        if self.classification != POLYNOMIAL:
            return False
        bound = self.envelope_value(self.radii)
        return bool(np.all(self.volumes <= bound * (1 + 1e-12)))

    def to_dict(self):
        return clean({
            "classification": self.classification,
            "fitted_degree": self.fitted_degree,
            "slope": self.slope,
            "fit_residual": self.fit_residual,
            "envelope": list(self.envelope),
            "radii": self.radii,
            "volumes": self.volumes,
        })


@dataclass
class WarpedAdmissibility:
    """
    Admissibility of a warping function for a tubed warped product.

    Attributes:
        expression: Warping function text
        a, b: Sampled lower and upper bounds of f
        derivative_bounds: sup|f^(k)| for k = 1..3
        curvature_sup: sup|K| with K = -f''/f
        curvature_derivative_sup: sup|K'|
        embeddable: sup|f'| < 1
        verdict: Whether every admissibility condition holds
        violations: Names of violated bounds
    """
    expression: str
    window: float
    a: float
    b: float
    derivative_bounds: List[float]
    curvature_sup: float
    curvature_derivative_sup: float
    embeddable: bool
    verdict: bool
    violations: List[str] = field(default_factory=list)

    def to_dict(self):
        return clean({
            "expression": self.expression,
            "window": self.window,
            "a": self.a,
            "b": self.b,
            "derivative_bounds": self.derivative_bounds,
            "curvature_sup": self.curvature_sup,
            "curvature_derivative_sup": self.curvature_derivative_sup,
            "embeddable": self.embeddable,
            "verdict": self.verdict,
            "violations": self.violations,
        })


@dataclass
class TubedVerdict:
    """Outcome of the tubed-embedding criterion with each checked condition."""
    verdict: str
    conditions: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in (VERDICT_YES, VERDICT_NO, VERDICT_UNKNOWN):
            raise ValueError(f"Unknown verdict: {self.verdict}")

    def to_dict(self):
        return clean({"admits_tubed_embedding_by_criterion": self.verdict,
                      "conditions": self.conditions})
