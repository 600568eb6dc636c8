"""
Shared fixtures for the test suite.
"""

import os
from pathlib import Path

import pytest

from src.config.run_configuration import RunConfig
from src.loaders.builtin_maps import builtin_map
from src.models.manifolds import Circle, Cylinder, Sphere

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"

# pipeline tests run below desk scale
PIPELINE_MESH = 256


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep TUBED_* variables of the calling shell out of the tests."""
    for key in list(os.environ):
        if key.startswith("TUBED_"):
            monkeypatch.delenv(key, raising=False)


@pytest.fixture
def make_config(tmp_path):
    """Build a small RunConfig writing into the test's tmp_path."""

    def build(**overrides) -> RunConfig:
        values = {
            "command": "extend",
            "mesh": PIPELINE_MESH,
            "output": str(tmp_path / "out"),
            "deterministic": True,
            "ball_grid": 0,
            "verify": False,
            "tau_samples": 4,
            "h_samples": 4,
        }
        values.update(overrides)
        return RunConfig(**values)

    return build


@pytest.fixture
def unit_circle() -> Circle:
    return Circle(1.0)


@pytest.fixture
def unit_sphere() -> Sphere:
    return Sphere(1.0)


@pytest.fixture
def thin_cylinder() -> Cylinder:
    return Cylinder(0.7, truncation_window=4.0)


@pytest.fixture
def plane_map():
    """Builtin map factory at a given resolution (pipeline mesh by default)."""

    def build(name: str, resolution: int = PIPELINE_MESH):
        return builtin_map(name, resolution)

    return build
