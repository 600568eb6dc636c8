"""
Tests for pair-sum kernels, the Gagliardo energy and its truncations.
"""

import math

import numpy as np
import pytest

from src.energy.gagliardo import GagliardoEnergy
from src.energy.pair_sums import ENERGY, EXCESS, GAP, TRUNCATED, kernel_numerator, tail_integral
from src.geometry.comparability import comparability_K
from src.loaders.builtin_maps import bump, plane_circle_map
from src.models.reports import EnergyReport

IDENTITY_ENERGY = 8 * math.pi ** 2 * math.log(2)


def random_circle_map(seed: int, resolution: int = 128):
    """Piecewise-smooth circle-valued map: random Fourier angle times a bump, jumps allowed."""
    rng = np.random.default_rng(seed)
    coefficients = rng.normal(scale=1.5, size=4)
    jump = rng.uniform(-0.8, 0.8) if rng.uniform() < 0.5 else None
    height = rng.uniform(0.3, 2.0)

    def profile(x):
        angle = sum(c * np.sin((k + 1) * np.pi * x) for k, c in enumerate(coefficients)) * bump(x / 0.9)
        if jump is not None:
            angle = angle + np.where(x > jump, height, 0.0) * bump(x / 0.9)
        return angle

    return plane_circle_map(f"random_{seed:03d}", profile, resolution, ["random"])


@pytest.fixture
def engine():
    return GagliardoEnergy()


class TestKernels:

    def test_energy_kernel(self):
        d = np.array([0.0, 0.5, 2.0])
        np.testing.assert_allclose(kernel_numerator(d, 1, ENERGY), [0.0, 0.25, 4.0])
        np.testing.assert_allclose(kernel_numerator(d, 2, ENERGY), [0.0, 0.125, 8.0])

    def test_truncated_and_gap_kernels(self):
        d = np.array([0.1, 0.5, 1.0])
        np.testing.assert_allclose(kernel_numerator(d, 1, TRUNCATED, delta=0.5), [0.0, 0.25, 1.0])
        np.testing.assert_allclose(kernel_numerator(d, 1, GAP, delta=0.5), [0.0, 1.0, 1.0])

    def test_excess_kernel(self):
        d = np.array([0.1, 0.5, 1.0])
        np.testing.assert_allclose(kernel_numerator(d, 1, EXCESS, delta=0.4, eta=0.5), [0.0, 0.09, 0.64])

    @pytest.mark.parametrize("kernel, delta, eta", [
        (TRUNCATED, None, None),
        (GAP, 0.0, None),
        (EXCESS, 0.5, 1.0),
        ("bogus", 0.5, 0.5),
    ])
    def test_invalid_kernel_arguments(self, kernel, delta, eta):
        with pytest.raises(ValueError):
            kernel_numerator(np.ones(3), 1, kernel, delta=delta, eta=eta)

    def test_tail_integral_on_the_line(self):
        values = tail_integral(np.array([[0.0], [0.5]]), window=1.0, m=1)
        np.testing.assert_allclose(values, [2.0, 1 / 0.5 + 1 / 1.5])

    def test_tail_integral_on_the_plane(self):
        value = tail_integral(np.zeros((1, 2)), window=1.0, m=2)[0]
        assert value == pytest.approx(math.pi / 2 + 1, rel=1e-4)


class TestExtrapolation:

    def test_single_level(self):
        result = GagliardoEnergy.extrapolate([5.0])
        assert result.value == 5.0
        assert not result.divergent

    def test_contracting_increments_converge(self):
        # finest first: increments 0.25, 0.5, 1.0 halve towards the fine mesh
        result = GagliardoEnergy.extrapolate([10.0, 9.75, 9.25, 8.25])
        assert result.value == pytest.approx(10.25)
        assert not result.divergent

    def test_constant_increments_diverge(self):
        assert GagliardoEnergy.extrapolate([10.0, 9.0, 8.0, 7.0]).divergent

    def test_richardson_correction_is_clipped(self):
        result = GagliardoEnergy.extrapolate([9.0, 10.0, 10.5])
        assert result.value == 9.0


class TestGagliardoEnergy:

    def test_identity_circle_matches_closed_form(self, engine, plane_map):
        result = engine.gagliardo_energy(plane_map("identity_circle", 1024))
        assert not result.divergent
        assert result.value == pytest.approx(IDENTITY_ENERGY, rel=0.005)

    def test_constant_map_has_zero_energy(self, engine, plane_map):
        result = engine.gagliardo_energy(plane_map("constant"))
        assert result.value == 0.0
        assert not result.divergent

    @pytest.mark.parametrize("name", ["smooth_bump_100", "degree_one_ramp", "smoothed_step_040"])
    def test_smooth_maps_have_finite_energy(self, engine, plane_map, name):
        result = engine.gagliardo_energy(plane_map(name))
        assert not result.divergent
        assert 0 < result.value < math.inf

    def test_sharp_step_diverges(self, engine, plane_map):
        result = engine.gagliardo_energy(plane_map("sharp_antipodal_step"))
        assert result.divergent

    def test_energy_grows_with_amplitude(self, engine, plane_map):
        small = engine.gagliardo_energy(plane_map("smooth_bump_050")).value
        large = engine.gagliardo_energy(plane_map("smooth_bump_150")).value
        assert large > small

    def test_two_dimensional_maps(self, engine, plane_map):
        assert engine.gagliardo_energy(plane_map("constant_2d", 16)).value == 0.0
        result = engine.gagliardo_energy(plane_map("bump_2d", 16))
        assert 0 < result.value < math.inf

    def test_thread_count_does_not_change_the_sum(self, plane_map):
        surface_map = plane_map("smooth_bump_100")
        single = GagliardoEnergy(threads=1).gagliardo_energy(surface_map).value
        pooled = GagliardoEnergy(threads=4).gagliardo_energy(surface_map).value
        assert pooled == single


class TestReport:

    def test_report_fields(self, engine, plane_map):
        report = engine.report(plane_map("smooth_bump_100"), delta=0.125)
        assert report.delta == 0.125
        assert report.truncated <= report.pair_sum <= report.gagliardo
        assert report.refinement_history[0] == report.pair_sum
        assert report.to_dict()["nodes"] == 257

    def test_divergent_report_is_infinite(self, engine, plane_map):
        report = engine.report(plane_map("sharp_antipodal_step"), delta=0.125)
        assert report.divergent
        assert math.isinf(report.gagliardo)

    def test_truncated_above_full_energy_is_rejected(self):
        with pytest.raises(ValueError):
            EnergyReport(gagliardo=1.0, truncated=2.0, gap_potential=0.0, delta=0.1, quadrature_error_estimate=0.0)

    def test_delta_must_be_positive(self):
        with pytest.raises(ValueError):
            EnergyReport(gagliardo=1.0, truncated=0.5, gap_potential=0.0, delta=0.0, quadrature_error_estimate=0.0)


class TestInequalityChains:

    DELTAS = (0.05, 0.1, 0.25, 0.5, 1.0)

    @pytest.mark.parametrize("seed", range(100))
    def test_gap_truncated_energy_chain(self, engine, seed):
        surface_map = random_circle_map(seed)
        energy = engine.gagliardo_energy(surface_map)
        K = comparability_K(surface_map.manifold, 1.0, extra_points=surface_map.values).K
        for delta in self.DELTAS:
            truncated = engine.truncated_energy(surface_map, delta)
            gap = engine.gap_potential(surface_map, delta)
            assert gap <= truncated / delta ** 2 * (1 + 1e-12)
            if not energy.divergent:
                assert truncated <= energy.value * (1 + 1e-12)
            assert truncated <= (2 * K * 1.0) ** 2 * gap * (1 + 1e-12)


class TestEnergyProperties:

    def test_kernel_is_symmetric(self, plane_map):
        evaluator = GagliardoEnergy().evaluator(plane_map("degree_one_ramp", 128))
        block = evaluator.kernel_block(range(0, evaluator.mesh.node_count), ENERGY)
        np.testing.assert_allclose(block, block.T, rtol=1e-13, atol=0.0)

    def test_truncations_decrease_with_delta(self, engine, plane_map):
        surface_map = plane_map("smoothed_step_020")
        deltas = (0.01, 0.05, 0.1, 0.5, 1.0, 2.0)
        truncated = [engine.truncated_energy(surface_map, delta) for delta in deltas]
        gap = [engine.gap_potential(surface_map, delta) for delta in deltas]
        assert all(a >= b for a, b in zip(truncated, truncated[1:]))
        assert all(a >= b for a, b in zip(gap, gap[1:]))
        assert truncated[0] > truncated[-1]

    @pytest.mark.parametrize("name", ["smooth_bump_100", "degree_one_ramp"])
    def test_smooth_energy_converges_under_refinement(self, engine, plane_map, name):
        coarse = engine.gagliardo_energy(plane_map(name, 512)).value
        fine = engine.gagliardo_energy(plane_map(name, 1024)).value
        assert fine == pytest.approx(coarse, rel=0.01)
