"""
Command implementations: load inputs, run one pipeline, write its artifacts.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..config.manifold_spec import ManifoldSpec, MetricSpec
from ..config.run_configuration import RunConfig
from ..conformal.hyperbolic import BallGrid, extension_on_ball
from ..conformal.transport import BALL_TO_HALF_SPACE, HALF_SPACE_TO_BALL, transport_map
from ..diagnostics.growth import declared_growth, default_radii, growth_fit
from ..diagnostics.metrics import ModelMetric, WarpedCylinderMetric
from ..diagnostics.verdict import tubed_verdict
from ..diagnostics.warped import warped_admissible
from ..energy.gagliardo import GagliardoEnergy
from ..extension.assembly import ExtensionResult, assemble
from ..extension.verification import EstimateSample, verify_estimate
from ..factory.manifold_factory import ManifoldFactory
from ..geometry.reach import federer_reach, resolve_reach
from ..loaders.artifact_writer import ArtifactWriter
from ..loaders.builtin_maps import builtin_map, family_repository, is_builtin
from ..loaders.map_io import read_map_header, read_surface_map, write_surface_map
from ..loaders.spec_loader import SpecLoader
from ..models.errors import InvariantViolation, NonFiniteEnergy, SpecificationError
from ..models.manifolds import Circle, EmbeddedManifold, PointCloud, WarpedCylinder
from ..models.surface_map import SurfaceMap

# ball grids of 3-dimensional extensions are capped at this many cells per axis
BALL_GRID_3D_CAP = 64
ROUNDTRIP_TOLERANCE = 1e-12


class CommandRunner:
    """
    Runs one subcommand for a run configuration.

    Args:
        config: Run configuration
        factory: Manifold factory; a default one is created when None
    """

    def __init__(self, config: RunConfig, factory: Optional[ManifoldFactory] = None):
        self.config = config
        self.factory = factory or ManifoldFactory()
        self.loader = SpecLoader()
        self.writer = ArtifactWriter(config.output, config)
        self.logger = logging.getLogger(__name__)
        self._energy = GagliardoEnergy(threads=config.threads)

    def run(self) -> Dict[str, Any]:
        """
        Execute the configured command.

        Returns:
            The main report written by the command
        """
        commands = {
            "energy": self.cmd_energy,
            "extend": self.cmd_extend,
            "diagnose": self.cmd_diagnose,
            "reach": self.cmd_reach,
            "transport": self.cmd_transport,
        }
        self.logger.info(f"Running '{self.config.command}' (config {self.config.config_hash()[:12]})")
        return commands[self.config.command]()

    # Inputs

    def load_spec(self):
        if not self.config.manifold_spec:
            raise SpecificationError(f"Command '{self.config.command}' needs a manifold or metric spec")
        return self.loader.load(self.config.manifold_spec)

    def load_manifold(self, spec_path: Optional[str] = None) -> EmbeddedManifold:
        spec = self.loader.load(spec_path) if spec_path else self.load_spec()
        if not isinstance(spec, ManifoldSpec):
            raise SpecificationError(f"{spec_path or self.config.manifold_spec} describes a metric, not a manifold")
        return self.factory.create_manifold(spec)

    def load_map(self) -> SurfaceMap:
        """
        The map named by ``map_ref``: a builtin at the run's mesh size, or a
        map file whose target comes from the spec flag or the file header.
        """
        ref = self.config.map_ref
        if not ref:
            raise SpecificationError(f"Command '{self.config.command}' needs a map")
        if is_builtin(ref):
            return builtin_map(ref, self.config.mesh)
        path = Path(ref)
        spec_path = self.config.manifold_spec
        if not spec_path:
            declared = read_map_header(path).get("manifold")
            if not declared:
                raise SpecificationError(f"Map file {path} names no manifold and none was given")
            spec_path = str(path.parent / declared) if not Path(declared).is_absolute() else declared
        return read_surface_map(path, self.load_manifold(spec_path))

    def _plane_map(self, surface_map: SurfaceMap) -> SurfaceMap:
        if surface_map.mesh.is_plane:
            return surface_map
        self.logger.info(f"Transporting '{surface_map.name}' from {surface_map.domain} to the plane")
        return transport_map(surface_map, BALL_TO_HALF_SPACE)

    # Commands

    def cmd_energy(self) -> Dict[str, Any]:
        """
        Energy report of one map.

        Raises:
            NonFiniteEnergy: After writing the report, when refinement flags divergence
        """
        surface_map = self.load_map()
        reach = resolve_reach(surface_map.manifold, self.config.reach_samples, self.config.threads)
        delta = self.config.eta * (reach / 2) / 2
        report = self._energy.report(surface_map, delta)
        payload = {"map": surface_map.name, "domain": surface_map.domain, "reach": reach,
                   "energy": report.to_dict()}
        self.writer.write_json("energy.json", payload)
        if report.divergent:
            raise NonFiniteEnergy(f"Energy of '{surface_map.name}' diverges under refinement")
        return payload

    def cmd_extend(self) -> Dict[str, Any]:
        """
        Assemble the extension and write the field, its distribution, the
        estimate verification and the ball outputs.

        Raises:
            InvariantViolation: If the estimate fails on a validation map
        """
        surface_map = self._plane_map(self.load_map())
        result = assemble(surface_map, self.config, self._energy)
        self._write_extension(result)

        verification = None
        if self.config.verify:
            verification = self._verify(result)
            self.writer.write_json("estimate_verification.json", verification.to_dict())

        if self.config.ball_grid and surface_map.dimension in (1, 2):
            self._write_ball(result)

        summary = result.summary()
        summary["stats"] = (result.stats.to_dict(include_timing=not self.config.deterministic)
                            if result.stats else None)
        self.writer.write_json("extension.json", summary)
        if verification is not None and not verification.holds():
            failing = sorted(k for k, v in verification.validation_slack.items() if v < -1e-9)
            raise InvariantViolation("estimate-slack", f"validation maps {failing}")
        return summary

    def _write_extension(self, result: ExtensionResult) -> None:
        field = result.field
        sidecar = field.sidecar()
        sidecar.update({"map": result.surface_map.name, "mollifier": result.averaged.mollifier_id,
                        "reach": result.reach, "delta_N": result.delta_N})
        self.writer.write_grid("extension_field", field.values, sidecar)
        self.writer.write_grid("averaged_field", result.averaged.values, result.averaged.sidecar())
        self.writer.write_json("distribution.json", result.distribution.to_dict())
        self.writer.write_json("cubes.json", {"classification": result.classification.to_dict(),
                                              "lambda": result.lambda_choice.to_dict(),
                                              "counting": result.counting})
        self.writer.write_distribution_csv("distribution.csv", result.distribution)

    def _family_samples(self) -> Tuple[List[EstimateSample], List[EstimateSample]]:
        repository = family_repository(self.config.mesh)
        calibration, validation = [], []
        for family, samples in ((repository.calibration_family(), calibration),
                                (repository.validation_family(), validation)):
            for member in family:
                samples.append(EstimateSample.from_result(assemble(member, self.config, self._energy)))
        return calibration, validation

    def _verify(self, result: ExtensionResult):
        manifold = result.surface_map.manifold
        sample = EstimateSample.from_result(result)
        if isinstance(manifold, Circle) and manifold.radius == 1.0:
            calibration, validation = self._family_samples()
            if sample.name not in {s.name for s in calibration + validation}:
                validation.append(sample)
        else:
            self.logger.warning(f"No builtin families map into {manifold.kind}; "
                                f"calibrating on '{sample.name}' alone")
            calibration, validation = [sample], []
        return verify_estimate(calibration, validation, self.config.mode, result.reach,
                               m=result.surface_map.dimension, diameter=manifold.diameter,
                               is_compact=manifold.is_compact)

    def _write_ball(self, result: ExtensionResult) -> None:
        dimension = result.surface_map.dimension + 1
        resolution = self.config.ball_grid
        if dimension == 3 and resolution > BALL_GRID_3D_CAP:
            self.logger.info(f"Ball grid capped at {BALL_GRID_3D_CAP} cells per axis in dimension 3")
            resolution = BALL_GRID_3D_CAP
        ball = extension_on_ball(result, BallGrid(dimension, resolution))
        self.writer.write_grid("ball_extension", ball.values, ball.sidecar())
        self.writer.write_json("ball_distribution.json", {"euclidean": ball.euclidean.to_dict(),
                                                          "hyperbolic": ball.hyperbolic.to_dict()})
        self.writer.write_distribution_csv("ball_hyperbolic_distribution.csv", ball.hyperbolic)

    def cmd_diagnose(self) -> Dict[str, Any]:
        """Tubed-embedding verdict of a manifold or metric spec, with reach for embedded targets."""
        spec = self.load_spec()
        if isinstance(spec, MetricSpec):
            metric = self.factory.create_metric(spec)
            payload = self._diagnose_metric(metric, spec.radii)
        else:
            manifold = self.factory.create_manifold(spec)
            payload = self._diagnose_manifold(manifold)
        self.writer.write_json("verdict.json", payload)
        return payload

    def _diagnose_metric(self, metric: ModelMetric, radii: Optional[list] = None) -> Dict[str, Any]:
        if metric.measurable:
            growth = growth_fit(metric, radii if radii else default_radii(metric))
        else:
            growth = declared_growth(metric.group_growth)
        admissibility = None
        if isinstance(metric, WarpedCylinderMetric):
            admissibility = warped_admissible(metric.warping, metric.window)
        verdict = tubed_verdict(growth, admissibility, metric.bounded_geometry, metric.group_growth)
        return {
            "metric": metric.to_dict(),
            "verdict": verdict.to_dict(),
            "growth": growth.to_dict() if growth is not None else None,
            "admissibility": admissibility.to_dict() if admissibility is not None else None,
        }

    def _diagnose_manifold(self, manifold: EmbeddedManifold) -> Dict[str, Any]:
        metadata = manifold.metadata
        group_growth = metadata.get("fundamental_group_growth", "unknown")
        metric = self.factory.metric_for(manifold)
        admissibility = None
        if metric is not None:
            growth = growth_fit(metric, default_radii(metric))
            bounded = metric.bounded_geometry
            if isinstance(manifold, WarpedCylinder):
                admissibility = warped_admissible(manifold.warping, manifold.truncation_window)
        elif manifold.is_compact and not isinstance(manifold, PointCloud):
            growth, bounded = declared_growth("polynomial"), True
        else:
            growth, bounded = declared_growth(group_growth), metadata.get("bounded_geometry")
        verdict = tubed_verdict(growth, admissibility, bounded, group_growth)
        reach = federer_reach(manifold, self.config.reach_samples, self.config.threads)
        return {
            "manifold": manifold.to_dict(),
            "verdict": verdict.to_dict(),
            "growth": growth.to_dict() if growth is not None else None,
            "admissibility": admissibility.to_dict() if admissibility is not None else None,
            "reach": reach.to_dict(),
            "declared_reach": manifold.declared_reach(),
        }

    def cmd_reach(self) -> Dict[str, Any]:
        """Sampled Federer reach of an embedded manifold."""
        manifold = self.load_manifold()
        estimate = federer_reach(manifold, self.config.reach_samples, self.config.threads)
        payload = {"manifold": manifold.to_dict(), "reach": estimate.to_dict(),
                   "declared_reach": manifold.declared_reach()}
        self.writer.write_json("reach.json", payload)
        return payload

    def cmd_transport(self) -> Dict[str, Any]:
        """
        Transport a map between the line or plane and the sphere, write the
        transported map and check the roundtrip on the source nodes.
        """
        surface_map = self.load_map()
        direction = HALF_SPACE_TO_BALL if surface_map.mesh.is_plane else BALL_TO_HALF_SPACE
        back = BALL_TO_HALF_SPACE if direction == HALF_SPACE_TO_BALL else HALF_SPACE_TO_BALL
        moved = transport_map(surface_map, direction)
        returned = transport_map(moved, back, resolution=surface_map.mesh.resolution,
                                 domain=None if back == BALL_TO_HALF_SPACE else surface_map.domain)

        roundtrip = None
        if returned.source is not None:
            difference = returned.source(surface_map.mesh.points) - surface_map.values
            roundtrip = float(np.max(np.linalg.norm(difference, axis=1)))
            if roundtrip > ROUNDTRIP_TOLERANCE:
                self.logger.warning(f"Transport roundtrip error {roundtrip:.3g} exceeds {ROUNDTRIP_TOLERANCE:g}")

        write_surface_map(moved, Path(self.config.output) / "transported_map.csv",
                          manifold_ref=self.config.manifold_spec)
        payload = {"map": surface_map.name, "direction": direction, "source_domain": surface_map.domain,
                   "target_domain": moved.domain, "target_mesh": moved.mesh.to_dict(),
                   "roundtrip_error": roundtrip}
        self.writer.write_json("transport.json", payload)
        return payload
