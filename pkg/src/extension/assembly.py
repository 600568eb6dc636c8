"""
Assembly of the singular extension U of a plane-domain boundary map.

Stages: validate -> reach -> energy -> lambda -> average -> cubes -> boxes ->
reproject -> homogeneous -> distribution -> invariants. Each stage records a
StageResult; failures are logged with the stage name and re-raised.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..averaging.extension_by_averaging import AveragingOperator, BoundaryInterpolant, average_extend, build_slab
from ..averaging.mollifier import build_mollifier
from ..config.run_configuration import RunConfig
from ..cubes.classification import classify, counting_bound_check, scan_and_classify
from ..cubes.lambda_selection import select_lambda
from ..energy.gagliardo import GagliardoEnergy
from ..geometry.blocks import map_blocks
from ..geometry.comparability import comparability_K
from ..geometry.projection import MESH_TOLERANCE, assert_on_manifold, distance_to_manifold, project
from ..geometry.reach import resolve_reach
from ..models.cubes import BOUNDED_MODE, CubeClassification, LambdaChoice
from ..models.errors import InvariantViolation, MissingBound
from ..models.fields import AveragedField, Box, ExtensionField
from ..models.manifolds import EmbeddedManifold
from ..models.reports import ComparabilityConstant, DistributionReport, EnergyReport
from ..models.surface_map import SurfaceMap
from .boxes import BoxGrower, cube_boxes, escape_boxes, merge_boxes
from .distribution import distribution, gradient_magnitude, region_dirichlet
from .homogeneous import BoxTrace, homogeneous_extend, trace_oscillation, winding_degree
from .reprojection import reclassify_escapes, reproject_good, tube_escapes

LAYER_CAKE_TOLERANCE = 0.01


@dataclass
class StageResult:
    """
    Outcome of one pipeline stage.
    """
    name: str
    status: str = "pending"  # pending, success, failed
    seconds: float = 0.0
    detail: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    def is_success(self) -> bool:
        """Check if the stage succeeded."""
        return self.status == "success"

    def is_failed(self) -> bool:
        """Check if the stage failed."""
        return self.status == "failed"

    def to_dict(self):
        return {"name": self.name, "status": self.status, "detail": self.detail, "error": self.error}


@dataclass
class PipelineStats:
    """
    Statistics from one pipeline run.
    """
    stages: List[StageResult]
    total_seconds: float

    def get_failed_stages(self) -> List[StageResult]:
        return [stage for stage in self.stages if stage.is_failed()]

    def get_stage(self, name: str) -> Optional[StageResult]:
        return next((stage for stage in self.stages if stage.name == name), None)

    def to_dict(self, include_timing: bool = False):
        data = {"stages": [stage.to_dict() for stage in self.stages]}
        if include_timing:
            data["timing"] = {stage.name: stage.seconds for stage in self.stages}
            data["total_seconds"] = self.total_seconds
        return data


class ExtensionEvaluator:
    """
    Pointwise evaluation of U at arbitrary half-space points: the homogeneous
    rule inside boxes, Pi(V) elsewhere in the half-reach tube, NaN where V
    leaves the tube outside every box.
    """

    def __init__(self, operator: AveragingOperator, manifold: EmbeddedManifold, boxes: List[Box],
                 trace: BoxTrace, delta_N: float):
        self.operator = operator
        self.manifold = manifold
        self.boxes = boxes
        self.trace = trace
        self.delta_N = delta_N

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.full((points.shape[0], self.manifold.ambient_dim), np.nan)
        free = np.ones(points.shape[0], dtype=bool)
        for box in self.boxes:
            inside = box.contains(points) & free
            if np.any(inside):
                values[inside] = homogeneous_extend(box, self.trace, points[inside])
                free &= ~inside
        if np.any(free):
            averaged = self.operator(points[free])
            distances, _ = distance_to_manifold(self.manifold, averaged)
            safe = distances < self.delta_N
            rows = np.flatnonzero(free)[safe]
            if rows.size:
                values[rows] = project(self.manifold, averaged[safe])
        return values


@dataclass
class ExtensionResult:
    """
    Everything the assembly produced for one boundary map.

    Attributes:
        surface_map: Boundary map u
        field: Assembled extension U on the slab
        distribution: Distribution report of |DU|
        gradient: |DU| per slab node
        averaged: Extension by averaging V
        classification: Chosen (tau, h) cube classification
        lambda_choice: Scale ratio selection
        energy: Energy report of u
        reach: Reach of the target
        comparability: K and L (bounded mode)
        counting: Counting-bound check of the chosen family
        trace_error: L1 distance between U at the floor and u
        averaged_trace_error: L1 distance between V at the floor and u
        evaluator: Pointwise evaluator of U
        stats: Stage results
        boxes: Boxes that received a homogeneous extension
    """
    surface_map: SurfaceMap
    field: ExtensionField
    distribution: DistributionReport
    gradient: np.ndarray
    averaged: AveragedField
    classification: CubeClassification
    lambda_choice: LambdaChoice
    energy: EnergyReport
    reach: float
    comparability: Optional[ComparabilityConstant]
    counting: Dict[str, float]
    trace_error: float
    averaged_trace_error: float
    evaluator: Optional[ExtensionEvaluator] = None
    stats: Optional[PipelineStats] = None
    boxes: List[Box] = field(default_factory=list)

    @property
    def delta_N(self) -> float:
        return self.reach / 2

    def summary(self) -> Dict[str, Any]:
        return {
            "map": self.surface_map.name,
            "reach": self.reach,
            "delta_N": self.delta_N,
            "lambda": self.lambda_choice.to_dict(),
            "energy": self.energy.to_dict(),
            "comparability": self.comparability.to_dict() if self.comparability else None,
            "classification": self.classification.to_dict(),
            "counting": dict(self.counting),
            "singular_count": self.field.singular_count,
            "winding_degrees": list(self.field.winding_degrees),
            "provenance": self.field.provenance_counts(),
            "singular_dirichlet": self.distribution.singular_dirichlet,
            "trace_error": self.trace_error,
            "averaged_trace_error": self.averaged_trace_error,
        }


def compact_bound(manifold: EmbeddedManifold, samples: int = 256) -> float:
    """sup |p| over samples of a compact target, used as L when none is declared."""
    points, _, _ = manifold.sample(samples)
    return float(np.max(np.linalg.norm(points, axis=1)))


def floor_trace_error(values: np.ndarray, slab, surface_map: SurfaceMap) -> float:
    """L1 distance over the slab's horizontal grid between a field's floor row and u."""
    m = slab.m
    floor = values[(slice(None),) * m + (0,)].reshape(-1, values.shape[-1])
    mesh = np.meshgrid(*([slab.horizontal] * m), indexing="ij")
    base = np.stack([g.ravel() for g in mesh], axis=-1)
    target = BoundaryInterpolant(surface_map)(base)
    weights = slab.floor_weights()
    return math.fsum(weights * np.linalg.norm(floor - target, axis=1))


def covered_by(boxes: List[Box], slab) -> np.ndarray:
    """Slab nodes inside any of the boxes."""
    coordinates = slab.coordinates()
    covered = np.zeros(coordinates.shape[0], dtype=bool)
    for box in boxes:
        covered |= box.contains(coordinates)
    return covered.reshape(slab.shape)


class ExtensionPipeline:
    """
    Builds the singular extension of a plane-domain map into the slab.

    Args:
        config: Run configuration (eta, C1, mode, mesh and slab parameters)
        energy: Energy engine; one is built from the configuration by default
    """

    def __init__(self, config: RunConfig, energy: Optional[GagliardoEnergy] = None):
        self.config = config
        self.energy = energy or GagliardoEnergy(threads=config.threads)
        self.logger = logging.getLogger(__name__)
        self.stage_results: List[StageResult] = []

    def _stage(self, name: str, fn: Callable[[], Any]) -> Any:
        stage = StageResult(name=name)
        start = time.perf_counter()
        self.logger.info(f"Stage '{name}' started")
        try:
            result = fn()
        except Exception as e:
            stage.status = "failed"
            stage.error = f"{type(e).__name__}: {e}"
            stage.seconds = time.perf_counter() - start
            self.stage_results.append(stage)
            self.logger.error(f"Stage '{name}' failed after {stage.seconds:.2f}s: {e}")
            raise
        stage.status = "success"
        stage.seconds = time.perf_counter() - start
        self.stage_results.append(stage)
        self.logger.info(f"Stage '{name}' finished in {stage.seconds:.2f}s")
        return result

    def _note(self, **detail) -> None:
        self.stage_results[-1].detail.update(detail)

    def _check_reference(self, reference: ExtensionResult, surface_map: SurfaceMap) -> None:
        if reference.surface_map.dimension != surface_map.dimension:
            raise ValueError("Reference construction has a different boundary dimension")
        if reference.lambda_choice.mode != self.config.mode:
            raise ValueError(f"Reference construction was built in {reference.lambda_choice.mode} mode")

    @staticmethod
    def _check_reference_slab(reference: ExtensionResult, slab) -> None:
        ref_slab = reference.field.slab
        same = (np.isclose(ref_slab.horizontal[0], slab.horizontal[0])
                and np.isclose(ref_slab.horizontal[-1], slab.horizontal[-1])
                and np.isclose(ref_slab.h_min, slab.h_min) and np.isclose(ref_slab.h_max, slab.h_max))
        if not same:
            raise ValueError("Reference construction was built on a different slab")

    def run(self, surface_map: SurfaceMap, reference: Optional[ExtensionResult] = None) -> ExtensionResult:
        """
        Assemble U for ``surface_map``.

        With a ``reference`` result of the same map on a coarser mesh, its
        lambda, its (tau, h) family and its boxes are reused, so U is the
        same continuum function sampled on a finer grid. Boxes are only
        regrown when the finer grid finds bad cubes or tube escapes outside
        them.

        Raises:
            TailNotConstant, MissingBound, NotOnManifold: On unusable input
            NonFiniteEnergy: If the energy diverges
            TubeEscape, BoundaryNotOnManifold, InvariantViolation: If an
                assembled artifact fails its invariants
        """
        cfg = self.config
        start = time.perf_counter()
        self.stage_results = []
        manifold = surface_map.manifold
        m = surface_map.dimension
        if reference is not None:
            self._check_reference(reference, surface_map)

        def validate():
            if not surface_map.mesh.is_plane:
                raise ValueError(f"Map '{surface_map.name}' lives on {surface_map.domain}; "
                                 f"transport it to the plane first")
            surface_map.require_tail()
            assert_on_manifold(manifold, surface_map.values, what="map value")
            assert_on_manifold(manifold, surface_map.tail_value, what="tail value")

        self._stage("validate", validate)

        if reference is not None:
            reach = self._stage("reach", lambda: reference.reach)
        else:
            reach = self._stage("reach", lambda: resolve_reach(manifold, cfg.reach_samples, cfg.threads))
        delta_N = reach / 2
        self._note(reach=reach, delta_N=delta_N)
        delta = cfg.eta * delta_N / 2

        energy_report = self._stage("energy", lambda: self.energy.report(surface_map, delta, require_finite=True))
        self._note(gagliardo=energy_report.gagliardo, gap=energy_report.gap_potential)

        def choose_lambda():
            if reference is not None:
                return reference.comparability, reference.lambda_choice
            if cfg.mode != BOUNDED_MODE:
                return None, select_lambda(cfg.mode, surface_map, delta, cfg.C1,
                                           gagliardo=energy_report.gagliardo, cap=cfg.lambda_cap)
            L = surface_map.L_bound
            if L is None and manifold.is_compact:
                L = max(compact_bound(manifold), surface_map.sup_norm())
                self.logger.info(f"No L bound declared for '{surface_map.name}'; using compact bound {L:.6g}")
            if L is None:
                raise MissingBound(f"Bounded mode needs an L-infinity bound for map '{surface_map.name}'")
            constant = comparability_K(manifold, L, extra_points=surface_map.values)
            return constant, select_lambda(cfg.mode, surface_map, delta, cfg.C1, K=constant.K, L=L,
                                           gap=energy_report.gap_potential, cap=cfg.lambda_cap)

        comparability, choice = self._stage("lambda", choose_lambda)
        self._note(lam=choice.lam, lam_used=choice.lam_used)

        def average():
            mollifier = build_mollifier(m)
            slab = build_slab(surface_map, cfg.mesh, floor_factor=cfg.slab_min, height_factor=cfg.slab_height)
            return average_extend(surface_map, mollifier, slab, manifold, threads=cfg.threads)

        averaged = self._stage("average", average)
        slab = averaged.slab
        if reference is not None:
            self._check_reference_slab(reference, slab)
        self._note(nodes=slab.node_count, quadrature_error=averaged.quadrature_error)

        def classify_cubes():
            if reference is None:
                result = scan_and_classify(choice.lam_used, averaged, manifold, delta_N, cfg.safety,
                                           cfg.tau_samples, cfg.h_samples)
            else:
                result = classify(reference.classification.family, averaged, manifold, delta_N, cfg.safety)
                result.scan = dict(reference.classification.scan)
                result.counting_integral = reference.classification.counting_integral
            reclassified = reclassify_escapes(result, averaged, delta_N)
            counting = counting_bound_check(result, surface_map, delta_N, cfg.eta, self.energy)
            return result, counting, reclassified

        classification, counting, reclassified = self._stage("cubes", classify_cubes)
        self._note(bad_cubes=classification.bad_count, reclassified=reclassified,
                   tau=classification.family.tau)

        def regions():
            escaped = tube_escapes(averaged, delta_N)
            bad = classification.bad_cubes
            kept: List[Box] = []
            if reference is not None:
                kept = list(reference.boxes)
                escaped = escaped & ~covered_by(kept, slab)
                bad = [cube for cube in bad
                       if not any(np.all(box.contains(np.stack([cube.lower, cube.upper]))) for box in kept)]
            seeds = cube_boxes(bad) + escape_boxes(escaped, slab)
            if not seeds:
                return kept
            if kept:
                self.logger.warning(f"{len(seeds)} regions outside the reference boxes; regrowing")
            grower = BoxGrower(averaged, manifold, delta_N, safety=cfg.safety)
            return grower.grow(merge_boxes(kept + seeds))

        boxes = self._stage("boxes", regions)
        self._note(boxes=len(boxes))

        coordinates = slab.coordinates()
        covered = covered_by(boxes, slab)

        extension = self._stage("reproject", lambda: reproject_good(averaged, classification, manifold, delta_N,
                                                                      covered=covered, threads=cfg.threads))
        trace = BoxTrace(averaged.evaluate, surface_map, manifold, delta_N, slab.h_min)
        singular_boxes: List[Box] = []

        def extend():
            flat = extension.values.reshape(-1, extension.values.shape[-1])
            ordered = sorted(boxes, key=lambda b: -float(np.prod(b.upper - b.lower)))

            def one_box(rows: range):
                box = ordered[rows.start]
                inside = np.flatnonzero(box.contains(coordinates))
                values = homogeneous_extend(box, trace, coordinates[inside], manifold)
                oscillation = trace_oscillation(box, trace)
                degree = winding_degree(box, trace) if m == 1 and manifold.ambient_dim == 2 else None
                return inside, values, oscillation, degree

            for box, (inside, values, oscillation, degree) in zip(
                    ordered, map_blocks(one_box, len(ordered), 1, cfg.threads)):
                if inside.size:
                    flat[inside] = values
                if oscillation >= delta_N:
                    extension.singular_points.append(box.barycenter)
                    singular_boxes.append(box)
                    if degree is not None:
                        extension.winding_degrees.append(degree)
                else:
                    extension.removable_points.append(box.barycenter)
                extension.boxes.append(box.to_pair())
            if trace.floor_hits:
                self.logger.warning(f"{trace.floor_hits} box trace points on the slab floor used the boundary map")
            return extension

        extension = self._stage("homogeneous", extend)
        self._note(singular=extension.singular_count, removable=len(extension.removable_points))
        self.logger.info(f"Map '{surface_map.name}': {classification.bad_count} bad cubes, {len(boxes)} boxes, "
                         f"{extension.singular_count} singular points")

        def measure():
            gradient = gradient_magnitude(extension.values, slab.axes)
            weights = slab.cell_weights()
            report = distribution(gradient, weights, m, extension.singular_count)
            report.singular_dirichlet = region_dirichlet(gradient, weights, covered_by(singular_boxes, slab))
            return gradient, report

        gradient, report = self._stage("distribution", measure)
        self._note(weak_norm=report.weak_norm, w11_norm=report.w11_norm,
                   singular_dirichlet=report.singular_dirichlet)

        def check():
            flat = extension.values.reshape(-1, extension.values.shape[-1])
            if not np.all(np.isfinite(flat)):
                raise InvariantViolation("on-manifold", "some nodes received no value")
            distances, _ = distance_to_manifold(manifold, flat)
            if np.max(distances, initial=0.0) > MESH_TOLERANCE:
                raise InvariantViolation("on-manifold", f"max distance {np.max(distances):.3g}")
            if abs(report.layer_cake - report.w11_norm) > LAYER_CAKE_TOLERANCE * max(report.w11_norm, 1e-300):
                raise InvariantViolation("layer-cake", f"{report.layer_cake:.6g} vs {report.w11_norm:.6g}")
            if report.weak_norm > report.strong_norm * (1 + 1e-9):
                raise InvariantViolation("weak-below-strong", f"{report.weak_norm:.6g} > {report.strong_norm:.6g}")
            return (floor_trace_error(extension.values, slab, surface_map),
                    floor_trace_error(averaged.values, slab, surface_map))

        trace_error, averaged_trace_error = self._stage("invariants", check)
        self._note(trace_error=trace_error, averaged_trace_error=averaged_trace_error)

        stats = PipelineStats(stages=list(self.stage_results), total_seconds=time.perf_counter() - start)
        evaluator = ExtensionEvaluator(averaged.evaluate, manifold, boxes, trace, delta_N)
        return ExtensionResult(
            surface_map=surface_map,
            field=extension,
            distribution=report,
            gradient=gradient,
            averaged=averaged,
            classification=classification,
            lambda_choice=choice,
            energy=energy_report,
            reach=reach,
            comparability=comparability,
            counting=counting,
            trace_error=trace_error,
            averaged_trace_error=averaged_trace_error,
            evaluator=evaluator,
            stats=stats,
            boxes=boxes,
        )


def assemble(surface_map: SurfaceMap, config: RunConfig, energy: Optional[GagliardoEnergy] = None,
             reference: Optional[ExtensionResult] = None) -> ExtensionResult:
    """Run the extension pipeline for one map, optionally on a coarser run's construction."""
    return ExtensionPipeline(config, energy).run(surface_map, reference=reference)
