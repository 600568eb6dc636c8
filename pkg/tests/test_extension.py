"""
Tests for boxes, homogeneous extension, distribution functions, estimate
verification and the assembled extension pipeline.
"""

import math

import numpy as np
import pytest

from src.averaging.extension_by_averaging import average_extend, build_slab
from src.averaging.mollifier import build_mollifier
from src.cubes.classification import classify
from src.cubes.families import make_family
from src.extension.assembly import ExtensionPipeline, assemble
from src.extension.boxes import BoxGrower, cube_boxes, escape_boxes, merge_boxes
from src.extension.distribution import distribution, gradient_magnitude, mu_at, region_dirichlet
from src.extension.homogeneous import (
    homogeneous_extend,
    perimeter_loop,
    radial_hits,
    sup_gauge,
    trace_oscillation,
    winding_degree,
)
from src.extension.reprojection import reproject_good, tube_escapes
from src.extension.verification import EstimateSample, fit_constants, slack, verify_estimate
from src.loaders.builtin_maps import family_repository
from src.models.cubes import BOUNDED_MODE, GENERAL_MODE, Cube
from src.models.errors import (
    BoundaryNotOnManifold,
    FitInfeasible,
    MissingBound,
    NonFiniteEnergy,
    TubeEscape,
)
from src.models.fields import HOMOGENEOUS, REPROJECTED, Box, SlabGrid

STAGES = ["validate", "reach", "energy", "lambda", "average", "cubes", "boxes", "reproject",
          "homogeneous", "distribution", "invariants"]


@pytest.fixture
def square():
    return Box([0.0, 1.0], [2.0, 3.0])


def radial_trace(centre):
    """Unit vector from ``centre`` to each point: a degree-one circle-valued trace."""
    def trace(points):
        offset = np.atleast_2d(points) - centre
        return offset / np.linalg.norm(offset, axis=1, keepdims=True)
    return trace


@pytest.fixture
def constant_field(plane_map, unit_circle):
    surface_map = plane_map("constant", 64)
    return average_extend(surface_map, build_mollifier(1), build_slab(surface_map, 64), unit_circle)


class TestBoxes:

    def test_degenerate_box(self):
        with pytest.raises(ValueError):
            Box([0.0, 0.0], [1.0, 0.0])

    def test_geometry(self, square):
        np.testing.assert_allclose(square.barycenter, [1.0, 2.0])
        np.testing.assert_allclose(square.half_sizes, [1.0, 1.0])
        assert square.face_samples(1, 0, 5).shape == (5, 2)
        assert np.all(square.face_samples(1, 0, 5)[:, 1] == 1.0)

    def test_touching_boxes_merge(self):
        boxes = [Box([1.0, 0.0], [2.0, 1.0]), Box([5.0, 5.0], [6.0, 6.0]), Box([0.0, 0.0], [1.0, 1.0])]
        merged = merge_boxes(boxes)
        assert len(merged) == 2
        np.testing.assert_allclose(merged[0].lower, [0.0, 0.0])
        np.testing.assert_allclose(merged[0].upper, [2.0, 1.0])
        assert merged[0].seeds == 2
        assert merged[1].seeds == 1

    def test_merging_is_transitive(self):
        chain = [Box([float(i), 0.0], [i + 1.0, 1.0]) for i in range(4)]
        merged = merge_boxes(chain)
        assert len(merged) == 1
        np.testing.assert_allclose(merged[0].upper, [4.0, 1.0])

    def test_cube_boxes(self):
        cube = Cube(k=0, index=(0,), lower=np.array([0.0, 0.5]), edge=0.5)
        (box,) = cube_boxes([cube])
        np.testing.assert_allclose(box.upper, [0.5, 1.0])

    def test_escape_boxes_pad_one_cell(self):
        slab = SlabGrid(m=1, horizontal=np.linspace(0, 4, 5), heights=np.array([1.0, 2.0, 3.0, 4.0]))
        escaped = np.zeros(slab.shape, dtype=bool)
        escaped[2, 1] = escaped[2, 2] = True
        (box,) = escape_boxes(escaped, slab)
        np.testing.assert_allclose(box.lower, [1.0, 1.0])
        np.testing.assert_allclose(box.upper, [3.0, 4.0])
        assert escape_boxes(np.zeros(slab.shape, dtype=bool), slab) == []

    def test_safe_boxes_do_not_grow(self, constant_field, unit_circle):
        grower = BoxGrower(constant_field, unit_circle, delta_N=0.5)
        box = Box([-1.0, 0.5], [1.0, 2.0])
        (grown,) = grower.grow([box])
        np.testing.assert_allclose(grown.lower, box.lower)
        np.testing.assert_allclose(grown.upper, box.upper)


class TestHomogeneousExtension:

    def test_constant_along_rays(self, square):
        trace = radial_trace(square.barycenter)
        direction = np.array([0.3, -0.8])
        points = square.barycenter + np.outer([0.1, 0.4, 0.9], direction)
        values = homogeneous_extend(square, trace, points)
        np.testing.assert_allclose(values, np.tile(values[0], (3, 1)), atol=1e-14)

    def test_boundary_points_keep_their_trace(self, square):
        trace = radial_trace(square.barycenter)
        boundary = np.array([[2.0, 2.5], [0.5, 3.0]])
        np.testing.assert_allclose(homogeneous_extend(square, trace, boundary), trace(boundary))

    def test_radial_hits_and_gauge(self, square):
        hits = radial_hits(square, np.array([[1.5, 2.0], [1.0, 2.0]]))
        np.testing.assert_allclose(hits, [[2.0, 2.0], [1.0, 1.0]])
        assert sup_gauge(square, np.array([[1.5, 2.25]]))[0] == pytest.approx(0.5)

    def test_points_outside_the_box(self, square):
        with pytest.raises(ValueError):
            homogeneous_extend(square, radial_trace(square.barycenter), np.array([[3.0, 2.0]]))

    def test_trace_must_be_on_manifold(self, square, unit_circle):
        trace = radial_trace(square.barycenter)
        points = np.array([[1.5, 2.5]])
        homogeneous_extend(square, trace, points, unit_circle)
        with pytest.raises(BoundaryNotOnManifold):
            homogeneous_extend(square, lambda p: 2 * trace(p), points, unit_circle)

    def test_winding_degree_of_radial_trace(self, square):
        assert winding_degree(square, radial_trace(square.barycenter)) == 1
        assert winding_degree(square, lambda p: np.tile([1.0, 0.0], (len(p), 1))) == 0

    def test_winding_degree_needs_planar_values(self, square):
        with pytest.raises(ValueError):
            winding_degree(square, lambda p: np.tile([0.0, 0.0, 1.0], (len(p), 1)))

    def test_trace_oscillation(self, square):
        assert trace_oscillation(square, radial_trace(square.barycenter)) == pytest.approx(2.0)
        assert trace_oscillation(square, lambda p: np.tile([1.0, 0.0], (len(p), 1))) == 0.0

    def test_perimeter_loop(self, square):
        loop = perimeter_loop(square, samples=8)
        assert loop.shape == (32, 2)
        np.testing.assert_allclose(loop[0], square.lower)
        with pytest.raises(ValueError):
            perimeter_loop(Box(np.zeros(3), np.ones(3)))


class TestDistribution:

    def test_discrete_norms(self):
        g, w = np.array([1.0, 2.0, 3.0]), np.ones(3)
        report = distribution(g, w, m=1, singular_count=2)
        assert report.weak_norm == 9.0
        assert report.w11_norm == 6.0
        assert report.strong_norm == 14.0
        assert report.dirichlet == 14.0
        assert report.layer_cake == pytest.approx(6.0)
        assert report.support_measure == 3.0
        assert report.singular_count == 2
        assert mu_at(g, w, 2.0) == 2.0

    def test_region_dirichlet_ignores_unmasked_and_nan_nodes(self):
        g = np.array([1.0, 2.0, np.nan, 3.0])
        w = np.array([1.0, 0.5, 1.0, 0.0])
        mask = np.array([True, True, True, False])
        assert region_dirichlet(g, w, mask) == 3.0
        assert region_dirichlet(g, w, np.zeros(4, dtype=bool)) == 0.0

    def test_default_thresholds_span_the_samples(self):
        report = distribution(np.array([1.0, 2.0, 3.0]), np.ones(3), m=1)
        assert report.thresholds[0] == pytest.approx(1.0)
        assert report.thresholds[-1] == pytest.approx(3.0)
        assert report.mu[0] == 3.0
        assert np.all(np.diff(report.mu) <= 0)

    def test_supplied_thresholds(self):
        report = distribution(np.array([0.5, 1.0, 4.0]), np.array([2.0, 1.0, 0.5]), m=2,
                              thresholds=np.array([0.25, 1.0, 5.0]))
        np.testing.assert_allclose(report.mu, [3.5, 1.5, 0.0])
        # t^3 mu(t) peaks at the largest sample: 64 * 0.5
        assert report.weak_norm == 32.0

    def test_zero_gradient(self):
        report = distribution(np.zeros(10), np.ones(10), m=1)
        assert report.thresholds.size == 0
        assert report.weak_norm == 0.0
        assert report.layer_cake == 0.0

    def test_zero_weights_and_nans_are_ignored(self):
        report = distribution(np.array([1.0, np.nan, 5.0]), np.array([1.0, 1.0, 0.0]), m=1)
        assert report.w11_norm == 1.0
        assert report.support_measure == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            distribution(np.ones(3), np.ones(4), m=1)

    def test_gradient_of_linear_field(self):
        x = np.linspace(-1, 1, 9)
        s = np.geomspace(0.1, 2.0, 7)
        X, S = np.meshgrid(x, s, indexing="ij")
        values = np.stack([2 * X + 3 * S, np.zeros_like(X)], axis=-1)
        np.testing.assert_allclose(gradient_magnitude(values, [x, s]), math.sqrt(13.0))

    def test_gradient_on_one_axis(self):
        t = np.linspace(0, 1, 11)
        values = np.stack([np.cos(t), np.sin(t)], axis=-1)
        assert gradient_magnitude(values, [t]).shape == (11,)


class TestReprojection:

    def test_constant_field_reprojects_everywhere(self, constant_field, unit_circle):
        family = make_family(2.0, 1.0, (0.5,), constant_field.slab)
        classification = classify(family, constant_field, unit_circle, delta_N=0.5)
        extension = reproject_good(constant_field, classification, unit_circle, delta_N=0.5)
        assert np.all(extension.provenance == REPROJECTED)
        np.testing.assert_allclose(extension.values[..., 0], 1.0)
        assert extension.provenance_counts() == {"reprojected": constant_field.slab.node_count, "homogeneous": 0}

    def test_covered_nodes_are_left_for_boxes(self, constant_field, unit_circle):
        covered = np.zeros(constant_field.slab.shape, dtype=bool)
        covered[10:20, :2] = True
        extension = reproject_good(constant_field, None, unit_circle, delta_N=0.5, covered=covered)
        assert np.all(extension.provenance[covered] == HOMOGENEOUS)
        assert np.all(np.isnan(extension.values[covered]))

    def test_escaped_good_node(self, constant_field, unit_circle):
        constant_field.dist_field[5, 1] = 0.6
        covered = np.zeros(constant_field.slab.shape, dtype=bool)
        assert tube_escapes(constant_field, 0.5)[5, 1]
        with pytest.raises(TubeEscape):
            reproject_good(constant_field, None, unit_circle, delta_N=0.5, covered=covered)

    def test_escapes_need_a_distance_field(self, plane_map):
        surface_map = plane_map("constant", 64)
        field = average_extend(surface_map, build_mollifier(1), build_slab(surface_map, 64))
        with pytest.raises(ValueError):
            tube_escapes(field, 0.5)


class TestEstimateVerification:

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            EstimateSample("bad", lhs=-1.0, energy=1.0)
        with pytest.raises(ValueError):
            EstimateSample("", lhs=1.0, energy=1.0)
        with pytest.raises(ValueError):
            EstimateSample("no_gap", lhs=1.0, energy=1.0).exponent_input(BOUNDED_MODE)

    def test_trivial_family(self):
        assert fit_constants([EstimateSample("zero", 0.0, 0.0)], GENERAL_MODE) == (1.0, 0.0)

    def test_positive_side_with_zero_energy(self):
        with pytest.raises(FitInfeasible):
            fit_constants([EstimateSample("odd", 1.0, 0.0)], GENERAL_MODE)

    def test_proportional_family_needs_no_exponent(self):
        samples = [EstimateSample(f"m{e}", lhs=2 * e, energy=e) for e in (1.0, 2.0, 3.0)]
        A, B = fit_constants(samples, GENERAL_MODE)
        assert A == pytest.approx(2.0)
        assert B == pytest.approx(0.0, abs=1e-9)
        assert all(slack(s, A, B, GENERAL_MODE) >= 0 for s in samples)

    def test_exponential_family(self):
        samples = [EstimateSample(f"m{e}", lhs=e * math.exp(e), energy=e) for e in (1.0, 2.0, 3.0)]
        A, B = fit_constants(samples, GENERAL_MODE)
        assert A == pytest.approx(1.0, rel=1e-6)
        assert B == pytest.approx(1.0, rel=1e-6)
        A_linear, B_linear = fit_constants(samples, GENERAL_MODE, linear_regime=True)
        assert B_linear == pytest.approx(0.0, abs=1e-12)
        assert A_linear == pytest.approx(math.exp(3.0), rel=1e-6)

    def test_verification_report(self):
        calibration = [EstimateSample("a", 1.0, 1.0), EstimateSample("b", 2.0, 2.0)]
        validation = [EstimateSample("c", 1.5, 1.5)]
        report = verify_estimate(calibration, validation, GENERAL_MODE, reach=1.0, diameter=math.pi,
                                 is_compact=True)
        assert report.holds()
        assert report.compact_exponent == pytest.approx(math.pi ** 2)
        assert set(report.to_dict()["validation_slack"]) == {"c"}

    def test_failing_validation(self):
        calibration = [EstimateSample("a", 1.0, 1.0)]
        validation = [EstimateSample("c", 10.0, 1.0)]
        report = verify_estimate(calibration, validation, GENERAL_MODE, reach=1.0)
        assert not report.holds()
        assert report.validation_slack["c"] < 0

    def test_infinite_reach_is_linear(self):
        calibration = [EstimateSample("a", 1.0, 1.0, gap=1.0), EstimateSample("b", 4.0, 2.0, gap=3.0)]
        report = verify_estimate(calibration, [], BOUNDED_MODE, reach=math.inf)
        assert report.linear_regime
        assert report.fitted_B == pytest.approx(0.0, abs=1e-12)
        assert report.compact_exponent is None

    def test_families_must_be_disjoint(self):
        shared = EstimateSample("a", 1.0, 1.0)
        with pytest.raises(ValueError):
            verify_estimate([shared], [shared], GENERAL_MODE, reach=1.0)


class TestPipelineFailures:

    def test_sphere_maps_are_rejected(self, plane_map, make_config):
        pipeline = ExtensionPipeline(make_config())
        with pytest.raises(ValueError):
            pipeline.run(plane_map("identity_circle", 64))
        assert pipeline.stage_results[-1].name == "validate"
        assert pipeline.stage_results[-1].is_failed()

    def test_divergent_energy_stops_the_pipeline(self, plane_map, make_config):
        pipeline = ExtensionPipeline(make_config())
        with pytest.raises(NonFiniteEnergy):
            pipeline.run(plane_map("sharp_antipodal_step"))
        assert [stage.name for stage in pipeline.stage_results] == ["validate", "reach", "energy"]

    def test_bounded_mode_without_bound(self, plane_map, make_config):
        with pytest.raises(MissingBound):
            assemble(plane_map("cylinder_bump"), make_config(mode=BOUNDED_MODE))


@pytest.mark.slow
class TestPipeline:

    def test_constant_map(self, plane_map, make_config):
        result = assemble(plane_map("constant"), make_config())
        assert result.classification.bad_count == 0
        assert result.field.singular_count == 0
        assert result.distribution.thresholds.size == 0
        assert np.all(result.field.provenance == REPROJECTED)
        assert [stage.name for stage in result.stats.stages] == STAGES

    def test_small_oscillation_needs_no_boxes(self, plane_map, make_config):
        result = assemble(plane_map("small_oscillation"), make_config())
        assert result.classification.bad_count == 0
        assert result.field.boxes == []
        assert np.all(result.field.provenance == REPROJECTED)
        assert result.trace_error < 0.01

    def test_degree_one_ramp_has_a_singular_point(self, plane_map, make_config):
        result = assemble(plane_map("degree_one_ramp"), make_config())
        assert result.field.singular_count >= 1
        assert np.any(result.field.provenance == HOMOGENEOUS)
        assert 1 in [abs(d) for d in result.field.winding_degrees]

    @pytest.mark.parametrize("name", ["smoothed_step_040", "degree_one_ramp"])
    def test_assembled_field_invariants(self, plane_map, make_config, name):
        result = assemble(plane_map(name), make_config())
        values = result.field.values.reshape(-1, 2)
        np.testing.assert_allclose(np.linalg.norm(values, axis=1), 1.0, atol=1e-9)
        report = result.distribution
        assert report.layer_cake == pytest.approx(report.w11_norm, rel=0.01)
        assert report.weak_norm <= report.strong_norm
        assert result.counting["lhs"] >= 0

    def test_evaluator_matches_the_grid(self, plane_map, make_config):
        result = assemble(plane_map("smoothed_step_040"), make_config())
        coordinates = result.field.slab.coordinates()
        flat = result.field.values.reshape(-1, 2)
        rows = np.arange(0, coordinates.shape[0], 97)
        np.testing.assert_allclose(result.evaluator(coordinates[rows]), flat[rows], atol=1e-9)

    def test_bounded_mode_uses_comparability(self, plane_map, make_config):
        result = assemble(plane_map("small_oscillation"), make_config(mode=BOUNDED_MODE))
        assert result.comparability.K == pytest.approx(math.pi / 2, rel=1e-2)
        assert result.lambda_choice.mode == BOUNDED_MODE

    @pytest.mark.slow
    def test_refinement_study(self, plane_map, make_config):
        coarse = assemble(plane_map("degree_one_ramp", 512), make_config(mesh=512))
        refined = [assemble(plane_map("degree_one_ramp", mesh), make_config(mesh=mesh), reference=coarse)
                   for mesh in (1024, 2048)]
        results = [coarse] + refined
        assert all(r.field.singular_count >= 1 for r in results)
        dirichlet = [r.distribution.singular_dirichlet for r in results]
        weak = [r.distribution.weak_norm for r in results]
        for coarser, finer in zip(dirichlet, dirichlet[1:]):
            assert finer >= 1.2 * coarser
        for coarser, finer in zip(weak, weak[1:]):
            assert 0.5 <= finer / coarser <= 2.0

    def test_reference_construction_is_reused(self, plane_map, make_config):
        coarse = assemble(plane_map("degree_one_ramp", 256), make_config(mesh=256))
        fine = assemble(plane_map("degree_one_ramp", 512), make_config(mesh=512), reference=coarse)
        assert fine.lambda_choice is coarse.lambda_choice
        assert fine.classification.family == coarse.classification.family
        assert len(fine.boxes) == len(coarse.boxes)
        for fine_box, coarse_box in zip(fine.boxes, coarse.boxes):
            np.testing.assert_allclose(fine_box.lower, coarse_box.lower)
            np.testing.assert_allclose(fine_box.upper, coarse_box.upper)
        assert fine.field.slab.horizontal.size == 2 * coarse.field.slab.horizontal.size - 1

    def test_reference_must_share_the_mode(self, plane_map, make_config):
        coarse = assemble(plane_map("constant"), make_config())
        with pytest.raises(ValueError, match="mode"):
            assemble(plane_map("constant"), make_config(mode=BOUNDED_MODE), reference=coarse)


@pytest.mark.slow
class TestBuiltinFamilyEstimate:

    @staticmethod
    def verified(make_config, mesh):
        repository = family_repository(mesh)
        config = make_config(mesh=mesh)
        calibration = [assemble(member, config) for member in repository.calibration_family()]
        validation = [assemble(member, config) for member in repository.validation_family()]
        report = verify_estimate([EstimateSample.from_result(r) for r in calibration],
                                 [EstimateSample.from_result(r) for r in validation],
                                 GENERAL_MODE, calibration[0].reach)
        energies = [r.energy.gagliardo for r in calibration + validation]
        return report, max(energies)

    def test_fitted_bound_holds_on_the_validation_family(self, make_config):
        report, _ = self.verified(make_config, 256)
        assert report.holds()
        assert set(report.validation_slack) == {"small_oscillation", "degree_one_ramp", "smooth_bump_075",
                                                "smooth_bump_125", "smoothed_step_030"}
        assert len(report.calibration_slack) == 7
        assert all(value >= -1e-9 for value in report.calibration_slack.values())

    def test_fitted_constants_survive_a_refinement(self, make_config):
        coarse, energy = self.verified(make_config, 256)
        fine, _ = self.verified(make_config, 512)
        assert 0.5 <= fine.fitted_A / coarse.fitted_A <= 2.0
        assert math.exp(abs(fine.fitted_B - coarse.fitted_B) * energy) <= 2.0
