"""
Tests for map files, point clouds, builtin map families, the family
repository and the artifact writer.
"""

import json

import numpy as np
import pytest

from src.config.run_configuration import RunConfig
from src.loaders.artifact_writer import ArtifactWriter, module_versions
from src.loaders.builtin_maps import BUILTIN_MAPS, builtin_map, family_repository, is_builtin
from src.loaders.map_io import load_point_cloud_csv, read_map_header, read_surface_map, write_surface_map
from src.models.errors import MapFormatError, TailNotConstant
from src.models.reports import DistributionReport
from src.repository.map_family_repository import MapFamilyRepository

TINY_MAP = """\
# name: tiny
# domain: plane_R1_tail
# resolution: 4
# window: 1.0
# tail: [1.0, 0.0]
# tags: [step]
p1,v1,v2
-1.0,1.0,0.0
-0.5,0.0,1.0
0.0,-1.0,0.0
0.5,0.0,1.0
1.0,1.0,0.0
"""


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestMapFiles:

    def test_read_tiny_map(self, tmp_path, unit_circle):
        surface_map = read_surface_map(write_text(tmp_path / "tiny.csv", TINY_MAP), unit_circle)
        assert surface_map.name == "tiny"
        assert surface_map.mesh.node_count == 5
        np.testing.assert_allclose(surface_map.tail_value, [1.0, 0.0])
        np.testing.assert_allclose(surface_map.values[2], [-1.0, 0.0])
        assert surface_map.has_tag("step")

    def test_written_map_reads_back_exactly(self, tmp_path, plane_map, unit_circle):
        original = plane_map("smooth_bump_125", 64)
        path = write_surface_map(original, tmp_path / "maps" / "bump.csv", manifold_ref="circle.json")
        assert read_map_header(path)["manifold"] == "circle.json"
        restored = read_surface_map(path, unit_circle)
        assert np.array_equal(restored.values, original.values)
        assert restored.tags == original.tags
        assert restored.L_bound == 1.0

    @pytest.mark.parametrize("text", [
        "# name: [unclosed\np1,v1,v2\n",
        "# name: headless\np1,v1,v2\n0.0,1.0,0.0\n",
        TINY_MAP.replace("p1,v1,v2", "p1,v1"),
        TINY_MAP.replace("\n0.5,0.0,1.0\n", "\n"),
        TINY_MAP.replace("-0.5,0.0,1.0", "-0.4,0.0,1.0"),
        TINY_MAP.replace("0.0,-1.0,0.0", "0.0,minus,0.0"),
        TINY_MAP.split("p1,v1,v2")[0],
        TINY_MAP.replace("# resolution: 4", "# resolution: 3"),
    ])
    def test_malformed_map_files(self, tmp_path, unit_circle, text):
        with pytest.raises(MapFormatError):
            read_surface_map(write_text(tmp_path / "bad.csv", text), unit_circle)

    def test_tail_must_match_the_window_edge(self, tmp_path, unit_circle):
        text = TINY_MAP.replace("# tail: [1.0, 0.0]", "# tail: [-1.0, 0.0]")
        with pytest.raises(TailNotConstant):
            read_surface_map(write_text(tmp_path / "tail.csv", text), unit_circle)

    def test_missing_file(self, tmp_path, unit_circle):
        with pytest.raises(MapFormatError):
            read_surface_map(tmp_path / "absent.csv", unit_circle)


class TestPointCloud:

    def test_fixture_cloud(self, fixtures_dir):
        points, frames = load_point_cloud_csv(fixtures_dir / "point_cloud.csv", 1)
        assert points.shape[1] == 2
        assert frames.shape == points.shape + (1,)
        np.testing.assert_allclose(np.linalg.norm(frames[:, :, 0], axis=1), 1.0, atol=1e-9)

    def test_missing_tangent_columns(self, tmp_path):
        path = write_text(tmp_path / "cloud.csv", "x1,x2,t1_1\n1.0,0.0,0.0\n")
        with pytest.raises(MapFormatError):
            load_point_cloud_csv(path, 1)

    def test_needs_point_columns(self, tmp_path):
        path = write_text(tmp_path / "cloud.csv", "t1_1\n1.0\n")
        with pytest.raises(MapFormatError):
            load_point_cloud_csv(path, 1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MapFormatError):
            load_point_cloud_csv(tmp_path / "absent.csv", 1)


class TestBuiltinMaps:

    def test_prefix(self):
        assert is_builtin("builtin:constant")
        assert not is_builtin("maps/constant.csv")
        assert builtin_map("builtin:constant", 16).name == "constant"

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="Unknown builtin map"):
            builtin_map("builtin:spiral", 16)

    @pytest.mark.parametrize("name", sorted(BUILTIN_MAPS))
    def test_every_builtin_builds(self, name):
        surface_map = builtin_map(name, 16)
        assert surface_map.name == name
        assert surface_map.source is not None
        np.testing.assert_allclose(surface_map.source(surface_map.mesh.points), surface_map.values)

    def test_plane_maps_lie_on_the_circle(self, plane_map):
        surface_map = plane_map("smoothed_step_030", 64)
        np.testing.assert_allclose(np.linalg.norm(surface_map.values, axis=1), 1.0)
        np.testing.assert_allclose(surface_map.values[[0, -1]], [[1.0, 0.0], [1.0, 0.0]], atol=1e-12)

    def test_cylinder_bump_has_no_bound(self, plane_map):
        surface_map = plane_map("cylinder_bump", 32)
        assert surface_map.L_bound is None
        assert surface_map.manifold.kind == "cylinder"

    def test_sphere_maps_are_constant_near_the_north_pole(self, plane_map):
        surface_map = plane_map("degree_one_cap", 64)
        north = surface_map.mesh.points[:, 1] > np.cos(0.4)
        np.testing.assert_allclose(surface_map.values[north], np.tile([1.0, 0.0], (int(north.sum()), 1)),
                                   atol=1e-12)


class TestMapFamilies:

    def test_calibration_and_validation_families(self):
        repository = family_repository(16)
        calibration = {m.name for m in repository.calibration_family()}
        validation = {m.name for m in repository.validation_family()}
        assert calibration == {"constant", "smooth_bump_050", "smooth_bump_100", "smooth_bump_150",
                               "smoothed_step_040", "smoothed_step_020", "smoothed_step_010"}
        assert validation == {"small_oscillation", "degree_one_ramp", "smooth_bump_075", "smooth_bump_125",
                              "smoothed_step_030"}
        assert not calibration & validation


class TestMapFamilyRepository:

    @pytest.fixture
    def repository(self, plane_map):
        repository = MapFamilyRepository()
        for name in ("constant", "smooth_bump_075", "sharp_antipodal_step"):
            repository.add_map(plane_map(name, 16))
        return repository

    def test_lookup(self, repository):
        assert len(repository) == 3
        assert "constant" in repository
        assert "spiral" not in repository

    def test_tags(self, repository):
        assert [m.name for m in repository.get_maps_by_tag("STEP")] == ["sharp_antipodal_step"]
        assert [m.name for m in repository.calibration_family()] == ["constant"]
        assert [m.name for m in repository.validation_family()] == ["smooth_bump_075"]

    def test_duplicates_are_rejected(self, repository, plane_map):
        with pytest.raises(ValueError):
            repository.add_map(plane_map("constant", 16))

    def test_overlapping_families_are_rejected(self, repository, plane_map):
        shared = plane_map("smooth_bump_050", 16)
        shared.tags.append("validation")
        repository.add_map(shared)
        with pytest.raises(ValueError, match="smooth_bump_050"):
            repository.check_disjoint()


class TestArtifactWriter:

    @pytest.fixture
    def writer(self, tmp_path):
        return ArtifactWriter(tmp_path / "out", RunConfig(deterministic=True))

    def test_json_carries_provenance(self, writer):
        path = writer.write_json("report.json", {"value": np.float64(0.1 + 0.2), "flag": np.bool_(True),
                                                 "big": float("inf")})
        document = json.loads(path.read_text(encoding="utf-8"))
        assert document["value"] == 0.3
        assert document["flag"] is True
        assert document["big"] == "inf"
        assert document["provenance"]["config_hash"] == RunConfig(deterministic=True).config_hash()
        assert "generated_at" not in document["provenance"]

    def test_deterministic_json_is_byte_identical(self, writer):
        first = writer.write_json("a.json", {"b": 1, "a": [1.0, 2.0]}).read_bytes()
        second = writer.write_json("b.json", {"a": [1.0, 2.0], "b": 1}).read_bytes()
        assert first == second

    def test_timestamps_without_the_deterministic_flag(self, tmp_path):
        writer = ArtifactWriter(tmp_path, RunConfig())
        assert "generated_at" in writer.provenance()

    def test_grid_and_sidecar(self, writer):
        values = np.arange(6.0).reshape(2, 3)
        path = writer.write_grid("field", values, {"axes": ["x", "s"]})
        assert np.array_equal(np.load(path), values)
        sidecar = json.loads((path.parent / "field.json").read_text(encoding="utf-8"))
        assert sidecar["array"] == {"file": "field.npy", "shape": [2, 3], "dtype": "float64"}
        assert sidecar["axes"] == ["x", "s"]

    def test_distribution_csv(self, writer):
        report = DistributionReport(thresholds=np.array([1.0, 2.0, 3.0]), mu=np.array([3.0, 2.0, 1.0]),
                                    weak_norm=9.0, w11_norm=6.0, strong_norm=14.0, dirichlet=14.0,
                                    singular_count=0, support_measure=3.0)
        path = writer.write_distribution_csv("distribution.csv", report)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[1] == "# measure: lebesgue"
        assert lines[2] == "t,mu"
        assert lines[3:] == ["0,3", "1,3", "2,2", "3,1"]

    def test_summary_lists_written_files(self, writer):
        writer.write_json("a.json", {})
        assert writer.summary(3, "layer-cake") == {"files": ["a.json"], "exit_code": 3,
                                                   "failed_invariant": "layer-cake"}

    def test_module_versions(self):
        versions = module_versions()
        assert versions["tubed_extension"] == "0.1.0"
        assert set(versions) >= {"numpy", "scipy", "sympy", "PyYAML"}
