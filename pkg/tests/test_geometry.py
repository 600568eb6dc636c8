"""
Tests for projection, reach, geodesic distances and the comparability constant.
"""

import math

import numpy as np
import pytest

from src.geometry.comparability import comparability_K
from src.geometry.geodesic import geodesic_distance, pairwise_geodesic
from src.geometry.projection import assert_on_manifold, distance_to_manifold, project, tube_membership
from src.geometry.reach import federer_reach, resolve_reach
from src.loaders.map_io import load_point_cloud_csv
from src.models.errors import EmptyIntersection, NotOnManifold, OutsideTube
from src.models.manifolds import Circle, CliffordTorus, ConvexPatch, Cylinder, PointCloud, Sphere, WarpedCylinder
from src.models.warping import WarpingFunction


def tube_points(manifold, count, margin, seed=0):
    """Random points within ``margin`` of sampled manifold points."""
    rng = np.random.default_rng(seed)
    points, _, _ = manifold.sample(count)
    directions = rng.normal(size=points.shape)
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return points + margin * rng.uniform(0, 1, size=(points.shape[0], 1)) * directions


def brute_force_reach(manifold, params):
    """Federer quotient minimized pair by pair over the given parameters."""
    points = manifold.chart(params)
    frames, _ = np.linalg.qr(manifold.chart_jacobian(params))
    best = math.inf
    for p, frame in zip(points, frames):
        diff = points - p
        normal = diff - (diff @ frame) @ frame.T
        length = np.linalg.norm(normal, axis=1)
        chord = np.sum(diff * diff, axis=1)
        keep = length > 1e-12 * np.sqrt(chord)
        if np.any(keep):
            best = min(best, float(np.min(chord[keep] / (2 * length[keep]))))
    return best


def warped_surface():
    return WarpedCylinder(WarpingFunction("2 + sin(t)/4", period=2 * math.pi), truncation_window=6.0)


class TestReach:

    @pytest.mark.parametrize("manifold, expected", [
        (Circle(1.0), 1.0),
        (Sphere(1.0), 1.0),
        (Cylinder(0.7, truncation_window=4.0), 0.7),
    ])
    def test_sampled_reach_matches_closed_form(self, manifold, expected):
        estimate = federer_reach(manifold, sample_count=100)
        assert estimate.value == pytest.approx(expected, rel=0.01)
        assert estimate.exact == pytest.approx(expected)

    def test_history_is_nonincreasing(self, unit_sphere):
        estimate = federer_reach(unit_sphere, sample_count=200)
        values = [value for _, value in estimate.monotone_history]
        assert all(later <= earlier for earlier, later in zip(values, values[1:]))
        assert estimate.monotone_history[-1][0] == estimate.sample_count

    def test_seed_makes_estimate_reproducible(self, unit_circle):
        first = federer_reach(unit_circle, sample_count=64, seed=3)
        second = federer_reach(unit_circle, sample_count=64, seed=3)
        assert first.monotone_history == second.monotone_history

    def test_declared_reach_replaces_sampling(self, fixtures_dir):
        points, frames = load_point_cloud_csv(fixtures_dir / "point_cloud.csv", 1)
        cloud = PointCloud(points, frames, metadata={"reach": 0.25})
        assert resolve_reach(cloud) == 0.25

    def test_closed_form_beats_declared_reach(self):
        circle = Circle(1.0, metadata={"reach": 0.25})
        assert resolve_reach(circle) == 1.0

    def test_point_cloud_reach_of_ellipse(self, fixtures_dir):
        points, frames = load_point_cloud_csv(fixtures_dir / "point_cloud.csv", 1)
        estimate = federer_reach(PointCloud(points, frames))
        # semi-axes 2 and 1: smallest curvature radius 1/2
        assert estimate.value == pytest.approx(0.5, rel=0.02)
        assert estimate.exact is None

    def test_convex_patch_has_infinite_reach(self):
        patch = ConvexPatch([-1.0, -1.0], [1.0, 1.0])
        assert math.isinf(resolve_reach(patch))

    def test_too_few_samples(self, unit_circle):
        with pytest.raises(ValueError):
            federer_reach(unit_circle, sample_count=1)

    def test_clifford_torus_reach(self):
        torus = CliffordTorus(1.0, 1.0)
        estimate = federer_reach(torus, sample_count=400)
        assert estimate.value == pytest.approx(1.0, rel=1e-9)
        assert brute_force_reach(torus, torus.parameter_grid(900)) == pytest.approx(estimate.value, rel=1e-9)

    def test_warped_cylinder_reach(self):
        # the narrowest parallel has radius 7/4 and f' = 0 there
        surface = warped_surface()
        estimate = federer_reach(surface, sample_count=1024)
        brute = brute_force_reach(surface, surface.parameter_grid(2500))
        for value in (estimate.value, brute):
            assert 1.75 * (1 - 1e-9) <= value <= 1.75 * 1.02
        assert estimate.value == pytest.approx(brute, rel=0.02)


class TestProjection:

    @pytest.mark.parametrize("manifold", [Circle(1.0), Sphere(1.0), Cylinder(0.7, truncation_window=4.0)])
    def test_projection_is_idempotent(self, manifold):
        points = tube_points(manifold, 1000, 0.9 * manifold.exact_reach())
        once = project(manifold, points)
        twice = project(manifold, once)
        assert np.max(np.abs(twice - once)) <= 1e-10

    def test_projection_lands_on_manifold(self, unit_sphere):
        points = tube_points(unit_sphere, 500, 0.5)
        projected = project(unit_sphere, points)
        distances, exact = distance_to_manifold(unit_sphere, projected)
        assert np.all(exact)
        assert np.max(distances) <= 1e-12

    def test_circle_projection_is_radial(self, unit_circle):
        projected = project(unit_circle, [[0.0, 1.5], [-0.5, 0.0]])
        np.testing.assert_allclose(projected, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-15)

    def test_points_beyond_the_reach_are_rejected(self, unit_circle):
        with pytest.raises(OutsideTube):
            project(unit_circle, [[0.0, 0.0]])
        with pytest.raises(OutsideTube):
            project(unit_circle, [[2.5, 0.0]])

    def test_tube_membership(self, unit_circle):
        inside = tube_membership(unit_circle, [[1.1, 0.0], [1.6, 0.0]], margin=0.5)
        assert inside.tolist() == [True, False]

    def test_tube_margin_must_be_below_reach(self, unit_circle):
        with pytest.raises(ValueError):
            tube_membership(unit_circle, [[1.0, 0.0]], margin=1.0)

    def test_assert_on_manifold(self, unit_circle):
        assert_on_manifold(unit_circle, [[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(NotOnManifold):
            assert_on_manifold(unit_circle, [[1.0, 0.0], [0.0, -1.01]])

    def test_convex_patch_projection_clips(self):
        patch = ConvexPatch([0.0, 0.0], [1.0, 1.0])
        np.testing.assert_allclose(project(patch, [[2.0, 0.5], [-1.0, -1.0]]), [[1.0, 0.5], [0.0, 0.0]])

    @pytest.mark.parametrize("manifold, margin", [
        (Circle(1.0), 0.9),
        (Sphere(1.0), 0.9),
        (Cylinder(0.7, truncation_window=4.0), 0.6),
        (CliffordTorus(1.0, 1.0), 0.9),
        (warped_surface(), 1.0),
    ])
    def test_projection_beats_every_sample(self, manifold, margin):
        points = tube_points(manifold, 200, margin, seed=7)
        nearest = np.linalg.norm(points - project(manifold, points), axis=1)
        samples = manifold.chart(manifold.parameter_grid(20000))
        for z, distance in zip(points, nearest):
            assert distance <= np.min(np.linalg.norm(samples - z, axis=1)) + 1e-9


class TestGeodesic:

    def test_circle_geodesic_is_arc_length(self, unit_circle):
        assert geodesic_distance(unit_circle, [1.0, 0.0], [-1.0, 0.0]) == pytest.approx(math.pi)
        assert geodesic_distance(unit_circle, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.pi / 2)

    def test_identical_points(self, unit_sphere):
        assert geodesic_distance(unit_sphere, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]) == 0.0

    def test_endpoints_must_be_on_manifold(self, unit_circle):
        with pytest.raises(NotOnManifold):
            geodesic_distance(unit_circle, [1.0, 0.0], [0.5, 0.0])

    def test_pairwise_table_dominates_chord(self, unit_sphere):
        points, _, _ = unit_sphere.sample(50)
        table = pairwise_geodesic(unit_sphere, points)
        chord = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
        assert np.allclose(table, table.T)
        assert np.all(np.diag(table) == 0.0)
        assert np.all(table >= chord - 1e-12)

    @pytest.mark.parametrize("p, q, expected", [
        ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], math.pi / 2),
        ([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], math.pi),
        ([0.0, 0.0, 1.0], [0.0, -1.0, 0.0], math.pi / 2),
    ])
    def test_graph_distance_on_sphere_is_close_to_analytic(self, unit_sphere, p, q, expected):
        graph = geodesic_distance(unit_sphere, p, q, method="graph")
        assert graph == pytest.approx(expected, rel=0.02)

    def test_sphere_inverse_chart(self, unit_sphere):
        params = unit_sphere.parameter_grid(40)
        np.testing.assert_allclose(unit_sphere.inverse_chart(unit_sphere.chart(params)),
                                   np.where(params > np.pi, params - 2 * np.pi, params), atol=1e-12)

    def test_cylinder_geodesic_unrolls(self, thin_cylinder):
        p = [0.7, 0.0, 0.0]
        q = [-0.7, 0.0, 1.0]
        assert geodesic_distance(thin_cylinder, p, q) == pytest.approx(math.hypot(0.7 * math.pi, 1.0))


class TestComparability:

    def test_circle_constant_is_half_pi(self, unit_circle):
        constant = comparability_K(unit_circle, L=1.0)
        assert constant.K == pytest.approx(math.pi / 2, rel=1e-3)
        assert constant.L == 1.0

    def test_convex_patch_constant_is_one(self):
        patch = ConvexPatch([-1.0, -1.0], [1.0, 1.0])
        assert comparability_K(patch, L=2.0).K == pytest.approx(1.0)

    def test_extra_points_are_included(self, unit_circle):
        extra = np.array([[math.cos(0.123), math.sin(0.123)]])
        constant = comparability_K(unit_circle, L=1.0, sample_count=8, extra_points=extra)
        assert constant.sample_count == 9

    def test_empty_ball(self):
        shifted = ConvexPatch([10.0, 10.0], [11.0, 11.0])
        with pytest.raises(EmptyIntersection):
            comparability_K(shifted, L=1.0)


class TestWarpedCylinder:

    def test_embedding_is_isometric(self):
        surface = WarpedCylinder(WarpingFunction("2 + sin(t)/4", period=2 * math.pi), truncation_window=6.0)
        params = surface.parameter_grid(64)
        assert surface.isometry_defect(params) < 1e-5

    def test_steep_warping_is_rejected(self):
        with pytest.raises(ValueError):
            WarpedCylinder(WarpingFunction("2 + 2*sin(t)"), truncation_window=6.0)
