"""
Lambda-adic cube families in the upper half-space and their classification.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

BOUNDED_MODE = "bounded"
GENERAL_MODE = "general"
MODES = (BOUNDED_MODE, GENERAL_MODE)


@dataclass
class CubeFamily:
    """
    Family Q+ of cubes tau lambda^(-k) ([0,1]^(m+1) + (j + h, 1/(lambda-1))).

    Attributes:
        lam: Scale ratio lambda >= 2
        tau: Scale shift in [1, lambda)
        k_range: Inclusive generation range (k_min, k_max)
        h: Horizontal lattice offset in [0, 1]^m
        m: Boundary dimension
    """
    lam: float
    tau: float
    k_range: Tuple[int, int]
    h: Tuple[float, ...]
    m: int = 1

    def __post_init__(self):
        if self.lam < 2:
            raise ValueError(f"Lambda must be at least 2, got {self.lam}")
        if not 1 <= self.tau < self.lam:
            raise ValueError(f"Tau must lie in [1, lambda), got {self.tau}")
        if self.k_range[0] > self.k_range[1]:
            raise ValueError(f"Empty generation range {self.k_range}")
        self.h = tuple(float(v) for v in np.broadcast_to(np.asarray(self.h, dtype=float), (self.m,)))
        if any(v < 0 or v > 1 for v in self.h):
            raise ValueError("Offset h must lie in [0, 1]^m")

    def edge(self, k: int) -> float:
        return self.tau * self.lam ** (-k)

    def vertical_offset(self, k: int) -> float:
        """Height of the bottom face of generation k."""
        return self.edge(k) / (self.lam - 1)

    def layer(self, k: int) -> Tuple[float, float]:
        """Vertical extent of generation k; consecutive layers share a face."""
        bottom = self.vertical_offset(k)
        return bottom, bottom + self.edge(k)

    @property
    def generations(self) -> range:
        return range(self.k_range[0], self.k_range[1] + 1)

    def to_dict(self):
        return {"lambda": self.lam, "tau": self.tau, "k_range": list(self.k_range),
                "h": list(self.h), "m": self.m}


@dataclass
class Cube:
    """A closed (m+1)-cube given by generation, lattice index and corner."""
    k: int
    index: Tuple[int, ...]
    lower: np.ndarray
    edge: float

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.edge

    @property
    def barycenter(self) -> np.ndarray:
        return self.lower + self.edge / 2

    def contains(self, points: np.ndarray, strict: bool = False) -> np.ndarray:
        points = np.atleast_2d(points)
        if strict:
            return np.all((points > self.lower) & (points < self.upper), axis=1)
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)

    def boundary_samples(self, per_edge: int) -> np.ndarray:
        """
        Points on the boundary faces: a per_edge^m grid on each of the
        2(m+1) faces, corners included.
        """
        dim = self.lower.size
        ticks = np.linspace(0.0, 1.0, per_edge)
        faces = []
        for axis in range(dim):
            others = [ticks] * (dim - 1)
            grid = np.stack([g.ravel() for g in np.meshgrid(*others, indexing="ij")], axis=-1) if others else np.zeros((1, 0))
            for side in (0.0, 1.0):
                face = np.insert(grid, axis, side, axis=1)
                faces.append(face)
        unit = np.unique(np.concatenate(faces), axis=0)
        return self.lower + self.edge * unit


@dataclass
class CubeClassification:
    """
    Good/bad labels of one cube family and the counting quantity.

    Attributes:
        family: The classified family (the chosen tau, h)
        cubes: Enumerated cubes
        bad: Per-cube bad label
        sup_distance: Sampled sup over the boundary of dist(V, N) per cube
        threshold: delta_N / 2
        safety: Safety factor applied to the threshold
        counting_integral: Discretized integral over tau and h of bad counts
        scan: Bad counts per sampled (tau, h)
    """
    family: CubeFamily
    cubes: List[Cube]
    bad: np.ndarray
    sup_distance: np.ndarray
    threshold: float
    safety: float = 0.9
    counting_integral: float = 0.0
    scan: Dict[Tuple[float, Tuple[float, ...]], int] = field(default_factory=dict)

    @property
    def bad_count(self) -> int:
        return int(np.sum(self.bad))

    @property
    def bad_cubes(self) -> List[Cube]:
        return [cube for cube, flag in zip(self.cubes, self.bad) if flag]

    def bad_count_by_generation(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for cube, flag in zip(self.cubes, self.bad):
            counts[cube.k] = counts.get(cube.k, 0) + int(flag)
        return counts

    def to_dict(self):
        scan = [{"tau": tau, "h": list(h), "bad_count": count}
                for (tau, h), count in sorted(self.scan.items())]
        return {
            "family": self.family.to_dict(),
            "cube_count": len(self.cubes),
            "bad_count": self.bad_count,
            "bad_by_generation": {str(k): v for k, v in sorted(self.bad_count_by_generation().items())},
            "threshold": self.threshold,
            "safety": self.safety,
            "counting_integral": self.counting_integral,
            "scan": scan,
        }


@dataclass
class LambdaChoice:
    """
    Scale ratio chosen by the exponential formula.

    Attributes:
        lam: 1 + exp(exponent), clamped to at least 2 (may be inf)
        mode: bounded or general
        exponent_input: Gap potential (bounded) or Gagliardo energy (general)
        constants_used: C1 and, in bounded mode, K and L
        exponent: The full exponent fed to exp
        cap: Upper cap applied when building cube families
    """
    lam: float
    mode: str
    exponent_input: float
    constants_used: Dict[str, Optional[float]] = field(default_factory=dict)
    exponent: float = 0.0
    cap: float = math.inf

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"Unknown lambda mode: {self.mode}")
        self.lam = max(self.lam, 2.0)

    @property
    def lam_used(self) -> float:
        return min(self.lam, self.cap)

    def to_dict(self):
        return {
            "lambda": self.lam if math.isfinite(self.lam) else "inf",
            "lambda_used": self.lam_used,
            "mode": self.mode,
            "exponent_input": self.exponent_input,
            "exponent": self.exponent,
            "constants_used": dict(self.constants_used),
            "cap": self.cap if math.isfinite(self.cap) else "inf",
        }
