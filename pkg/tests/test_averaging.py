"""
Tests for the mollifier, slab grids and the extension by averaging.
"""

import math

import numpy as np
import pytest

from src.averaging.extension_by_averaging import (
    AveragingOperator,
    BoundaryInterpolant,
    average_extend,
    build_slab,
)
from src.averaging.mollifier import build_mollifier, mollifier_integral
from src.models.errors import BoundViolation, SlabTooShallow
from src.models.fields import Mollifier, SlabGrid
from src.models.manifolds import ConvexPatch
from src.models.meshes import PLANE_R1_TAIL, build_mesh
from src.models.surface_map import SurfaceMap


@pytest.fixture
def line_mollifier():
    return build_mollifier(1)


class TestMollifier:

    @pytest.mark.parametrize("m", [1, 2])
    def test_normalization_bounds(self, m):
        mollifier = build_mollifier(m)
        assert mollifier.integral == pytest.approx(1.0, abs=1e-10)
        assert mollifier.sup_bound <= 1.0
        assert mollifier.grad_bound <= 2.0

    def test_profile_vanishes_outside_the_ball(self):
        mollifier = build_mollifier(2)
        values = mollifier(np.array([[1.0, 0.0], [0.8, 0.8], [2.0, 0.0]]))
        np.testing.assert_allclose(values, 0.0, atol=1e-15)

    def test_line_profile_peak(self, line_mollifier):
        assert line_mollifier(np.array([[0.0]]))[0] == pytest.approx(15 / 16)

    def test_scaled_profile_violates_normalization(self):
        with pytest.raises(BoundViolation):
            build_mollifier(1, scale=2.0)

    @pytest.mark.parametrize("m", [0, 3])
    def test_unsupported_dimension(self, m):
        with pytest.raises(ValueError):
            build_mollifier(m)

    def test_quadrature_of_unnormalized_profile(self):
        raw = Mollifier(m=1, profile=(1.0, -2.0, 1.0))
        # integral of (1 - x^2)^2 over [-1, 1]
        assert mollifier_integral(raw) == pytest.approx(16 / 15)


class TestSlab:

    def test_build_slab_layout(self, plane_map):
        slab = build_slab(plane_map("smooth_bump_100", 64), 64)
        assert slab.shape == (65, 4)
        assert slab.window == pytest.approx(4.0)
        assert slab.h_min == pytest.approx(2.0 ** -8)
        assert slab.h_max == pytest.approx(8.0)

    def test_sphere_maps_need_transport_first(self, plane_map):
        with pytest.raises(ValueError):
            build_slab(plane_map("identity_circle", 64), 64)

    def test_floor_must_be_positive(self, plane_map):
        with pytest.raises(SlabTooShallow):
            build_slab(plane_map("constant", 64), 64, floor_factor=0.0)

    def test_cell_weights_integrate_the_box(self):
        slab = SlabGrid(m=2, horizontal=np.linspace(-1, 1, 9), heights=np.geomspace(0.1, 1.0, 5))
        assert slab.cell_weights().shape == slab.shape
        assert np.sum(slab.cell_weights()) == pytest.approx(4 * 0.9)
        assert slab.coordinates().shape == (9 * 9 * 5, 3)

    @pytest.mark.parametrize("horizontal, heights, m", [
        (np.linspace(-1, 1, 5), np.array([0.1, 0.5]), 3),
        (np.array([0.0, 0.0, 1.0]), np.array([0.1, 0.5]), 1),
        (np.linspace(-1, 1, 5), np.array([0.0, 0.5]), 1),
    ])
    def test_invalid_slabs(self, horizontal, heights, m):
        with pytest.raises(ValueError):
            SlabGrid(m=m, horizontal=horizontal, heights=heights)

    def test_contains(self):
        slab = SlabGrid(m=1, horizontal=np.linspace(-1, 1, 5), heights=np.array([0.1, 1.0]))
        inside = slab.contains(np.array([[0.0, 0.5], [0.0, 0.05], [1.5, 0.5]]))
        assert inside.tolist() == [True, False, False]


class TestBoundaryInterpolant:

    def test_nodes_and_tail(self, plane_map):
        surface_map = plane_map("smooth_bump_100", 64)
        interpolant = BoundaryInterpolant(surface_map)
        np.testing.assert_allclose(interpolant(surface_map.mesh.points), surface_map.values, atol=1e-14)
        np.testing.assert_allclose(interpolant(np.array([[3.0], [-7.5]])), [[1.0, 0.0], [1.0, 0.0]])

    def test_square_tail(self, plane_map):
        interpolant = BoundaryInterpolant(plane_map("bump_2d", 16))
        np.testing.assert_allclose(interpolant(np.array([[2.0, 0.0]])), [[0.0, 0.0, 1.0]])


class TestAveragingOperator:

    def test_constant_map_averages_to_the_constant(self, plane_map, line_mollifier):
        operator = AveragingOperator(plane_map("constant", 64), line_mollifier)
        points = np.array([[0.0, 0.01], [0.5, 1.0], [-3.0, 6.0]])
        np.testing.assert_allclose(operator(points), np.tile([1.0, 0.0], (3, 1)), atol=1e-14)

    def test_values_are_convex_combinations(self, plane_map, line_mollifier):
        operator = AveragingOperator(plane_map("degree_one_ramp", 128), line_mollifier)
        x, s = np.meshgrid(np.linspace(-2, 2, 21), np.geomspace(1e-3, 4, 12), indexing="ij")
        values = operator(np.stack([x.ravel(), s.ravel()], axis=-1))
        assert np.all(np.linalg.norm(values, axis=1) <= 1 + 1e-12)

    def test_trace_error_shrinks_towards_the_boundary(self, plane_map, line_mollifier):
        operator = AveragingOperator(plane_map("smooth_bump_100", 256), line_mollifier)
        errors = [operator.trace_error(h) for h in (0.5, 0.05, 0.005)]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 0.01

    def test_heights_must_be_positive(self, plane_map, line_mollifier):
        operator = AveragingOperator(plane_map("constant", 64), line_mollifier)
        with pytest.raises(SlabTooShallow):
            operator(np.array([[0.0, 0.0]]))

    def test_mollifier_dimension_must_match(self, plane_map):
        with pytest.raises(ValueError):
            AveragingOperator(plane_map("constant", 64), build_mollifier(2))

    def test_error_estimate_of_constant_map(self, plane_map, line_mollifier):
        operator = AveragingOperator(plane_map("constant", 64), line_mollifier)
        assert operator.error_estimate(np.array([[0.0, 0.5], [0.2, 0.1]])) <= 1e-14


class TestAverageExtend:

    def test_field_on_slab(self, plane_map, line_mollifier, unit_circle):
        surface_map = plane_map("small_oscillation", 64)
        slab = build_slab(surface_map, 64)
        field = average_extend(surface_map, line_mollifier, slab, unit_circle)
        assert field.values.shape == slab.shape + (2,)
        assert field.dist_field.shape == slab.shape
        # a small oscillation keeps the averaged field deep inside the tube
        assert np.max(field.dist_field) < 0.01
        assert not np.any(field.outside_tube)
        assert field.sidecar()["mollifier"] == line_mollifier.identifier

    def test_distance_field_is_optional(self, plane_map, line_mollifier):
        surface_map = plane_map("constant", 64)
        field = average_extend(surface_map, line_mollifier, build_slab(surface_map, 64))
        assert field.dist_field is None
        assert field.quadrature_error <= 1e-14

    def test_averaged_values_far_above_are_near_the_tail(self, plane_map, line_mollifier):
        surface_map = plane_map("smooth_bump_100", 256)
        field = average_extend(surface_map, line_mollifier, build_slab(surface_map, 256))
        top = field.values[..., -1, :]
        # at height 8 the window carries at most a quarter of the mollifier mass
        assert np.max(np.linalg.norm(top - np.array([1.0, 0.0]), axis=-1)) < 2 * math.sin(0.5) * 0.25


def plane_map_from(name, mesh, values, tail, manifold):
    return SurfaceMap(name, mesh, values, manifold, tail_value=np.asarray(tail, dtype=float))


class TestAveragingSymmetries:

    @pytest.fixture
    def points(self):
        x, s = np.meshgrid(np.linspace(-1.5, 1.5, 13), np.geomspace(0.01, 2.0, 7), indexing="ij")
        return np.stack([x.ravel(), s.ravel()], axis=-1)

    def test_linearity(self, plane_map, line_mollifier, points):
        first, second = plane_map("degree_one_ramp", 128), plane_map("smooth_bump_100", 128)
        alpha, beta = 0.3, -1.7
        combined = plane_map_from("combined", first.mesh, alpha * first.values + beta * second.values,
                                  alpha * first.tail_value + beta * second.tail_value,
                                  ConvexPatch([-3.0, -3.0], [3.0, 3.0]))
        expected = (alpha * AveragingOperator(first, line_mollifier)(points)
                    + beta * AveragingOperator(second, line_mollifier)(points))
        np.testing.assert_allclose(AveragingOperator(combined, line_mollifier)(points), expected, atol=1e-13)

    def test_translation_equivariance(self, plane_map, line_mollifier, points):
        surface_map = plane_map("degree_one_ramp", 128)
        shift = 0.25  # sixteen mesh cells
        shifted = plane_map_from("shifted", surface_map.mesh, surface_map.source(surface_map.mesh.points - shift),
                                 surface_map.tail_value, surface_map.manifold)
        moved = points + np.array([shift, 0.0])
        np.testing.assert_allclose(AveragingOperator(shifted, line_mollifier)(moved),
                                   AveragingOperator(surface_map, line_mollifier)(points), atol=1e-12)

    def test_linear_data_is_reproduced(self, line_mollifier):
        mesh = build_mesh(PLANE_R1_TAIL, 64, window=1.0)
        x = mesh.points[:, 0]
        # x on [-1/2, 1/2], folded back to zero at the window edge
        tent = np.where(np.abs(x) <= 0.5, x, np.sign(x) * (1 - np.abs(x)))
        surface_map = plane_map_from("odd_tent", mesh, tent[:, None], [0.0], ConvexPatch([-1.0], [1.0]))
        base, height = np.meshgrid(np.linspace(-0.3, 0.3, 7), [0.05, 0.1, 0.2], indexing="ij")
        points = np.stack([base.ravel(), height.ravel()], axis=-1)
        values = AveragingOperator(surface_map, line_mollifier)(points)
        np.testing.assert_allclose(values[:, 0], points[:, 0], atol=1e-12)
