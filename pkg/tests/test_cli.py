"""
End-to-end tests of the command-line front end: exit codes and written artifacts.
"""

import json

import pytest

from src.cli.main import build_parser, main


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"


class TestParser:

    def test_map_commands_take_a_map(self):
        args = build_parser().parse_args(["energy", "builtin:constant", "--eta", "0.25"])
        assert args.map_ref == "builtin:constant"
        assert args.eta == 0.25
        assert args.deterministic is None
        assert args.verify is None

    def test_skip_verification(self):
        args = build_parser().parse_args(["extend", "builtin:constant", "--skip-verification"])
        assert args.verify is False

    def test_spec_commands_take_a_spec(self):
        args = build_parser().parse_args(["reach", "circle.json"])
        assert args.manifold_spec == "circle.json"

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["plot", "builtin:constant"])


class TestInputErrors:

    def test_invalid_eta(self, out_dir):
        assert main(["energy", "builtin:constant", "--eta", "1.5", "--out", str(out_dir)]) == 1

    def test_unknown_builtin(self, out_dir):
        assert main(["energy", "builtin:spiral", "--out", str(out_dir)]) == 1

    def test_missing_spec_file(self, out_dir, tmp_path):
        assert main(["reach", str(tmp_path / "absent.json"), "--out", str(out_dir)]) == 1

    def test_metric_spec_is_not_a_manifold(self, out_dir, fixtures_dir):
        assert main(["reach", str(fixtures_dir / "euclidean_plane.json"), "--out", str(out_dir)]) == 1

    def test_invalid_environment_default(self, out_dir, monkeypatch):
        monkeypatch.setenv("TUBED_MESH", "100")
        assert main(["energy", "builtin:constant", "--out", str(out_dir)]) == 1

    def test_bounded_mode_needs_a_sup_bound(self, out_dir):
        argv = ["extend", "builtin:cylinder_bump", "--mode", "bounded", "--mesh", "64",
                "--skip-verification", "--ball-grid", "0", "--out", str(out_dir)]
        assert main(argv) == 1


class TestEnergyCommand:

    def test_smooth_map(self, out_dir):
        assert main(["energy", "builtin:smooth_bump_050", "--mesh", "256", "--out", str(out_dir)]) == 0
        report = read_json(out_dir / "energy.json")
        assert report["map"] == "smooth_bump_050"
        assert report["reach"] == 1.0
        assert report["energy"]["delta"] == 0.125
        assert report["energy"]["divergent"] is False
        assert "config_hash" in report["provenance"]

    def test_divergent_energy_exits_with_two(self, out_dir):
        assert main(["energy", "builtin:sharp_antipodal_step", "--mesh", "256", "--out", str(out_dir)]) == 2
        assert read_json(out_dir / "energy.json")["energy"]["divergent"] is True


class TestSpecCommands:

    def test_reach_of_the_circle(self, out_dir, fixtures_dir):
        assert main(["reach", str(fixtures_dir / "circle.json"), "--out", str(out_dir)]) == 0
        report = read_json(out_dir / "reach.json")
        assert {"manifold", "reach", "declared_reach"} <= set(report)
        assert report["declared_reach"] == 1.0
        assert report["manifold"]["kind"] == "circle"

    def test_unrecognized_environment_variable_is_only_a_warning(self, out_dir, fixtures_dir, monkeypatch,
                                                                  capsys):
        monkeypatch.setenv("TUBED_ETTA", "0.25")
        assert main(["reach", str(fixtures_dir / "circle.json"), "--out", str(out_dir)]) == 0
        assert "Unrecognized variable TUBED_ETTA" in capsys.readouterr().err

    @pytest.mark.parametrize("spec, verdict", [
        ("euclidean_plane.json", "yes"),
        ("hyperbolic_plane.json", "no"),
        ("negatively_curved_quotient.yaml", "no"),
        ("point_cloud.json", "unknown"),
    ])
    def test_diagnose_verdicts(self, out_dir, fixtures_dir, spec, verdict):
        assert main(["diagnose", str(fixtures_dir / spec), "--out", str(out_dir)]) == 0
        report = read_json(out_dir / "verdict.json")
        assert report["verdict"]["admits_tubed_embedding_by_criterion"] == verdict

    @pytest.mark.slow
    def test_diagnose_warped_cylinder(self, out_dir, fixtures_dir):
        assert main(["diagnose", str(fixtures_dir / "warped_cylinder.json"), "--out", str(out_dir)]) == 0
        report = read_json(out_dir / "verdict.json")
        assert report["verdict"]["admits_tubed_embedding_by_criterion"] == "yes"
        assert report["admissibility"]["verdict"] is True


class TestTransportCommand:

    def test_roundtrip_of_a_plane_map(self, out_dir):
        assert main(["transport", "builtin:smooth_bump_100", "--mesh", "64", "--out", str(out_dir)]) == 0
        report = read_json(out_dir / "transport.json")
        assert report["direction"] == "half_space_to_ball"
        assert report["target_domain"] == "sphere_S1"
        assert report["roundtrip_error"] <= 1e-12
        assert (out_dir / "transported_map.csv").exists()


@pytest.mark.slow
class TestExtendCommand:

    ARGS = ["extend", "builtin:constant", "--mesh", "64", "--deterministic", "--skip-verification",
            "--ball-grid", "16"]

    def test_deterministic_runs_are_byte_identical(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        assert main(self.ARGS + ["--out", str(first)]) == 0
        assert main(self.ARGS + ["--out", str(second)]) == 0
        for name in ("extension.json", "distribution.json", "cubes.json", "ball_distribution.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_constant_map_artifacts(self, out_dir):
        assert main(self.ARGS + ["--out", str(out_dir)]) == 0
        for name in ("extension_field.npy", "extension_field.json", "averaged_field.npy", "cubes.json",
                     "ball_extension.npy", "ball_hyperbolic_distribution.csv"):
            assert (out_dir / name).exists()
        assert not (out_dir / "estimate_verification.json").exists()
        rows = [line for line in (out_dir / "distribution.csv").read_text(encoding="utf-8").splitlines()
                if not line.startswith("#")]
        assert rows[0] == "t,mu"
        assert len(rows) == 2
        assert rows[1].startswith("0,")
