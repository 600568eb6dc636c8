"""
Writers for run artifacts: JSON reports, binary grids with JSON sidecars and
plot-ready CSV files.

Every file carries the run's provenance (config hash and module versions).
With the deterministic flag JSON is written with sorted keys and no
timestamps so repeated runs produce byte-identical files.
"""

import json
import logging
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from .. import __version__
from ..config.run_configuration import RunConfig
from ..models.reports import DistributionReport, clean

VERSIONED_MODULES = ("numpy", "scipy", "sympy", "PyYAML")


def module_versions() -> Dict[str, str]:
    """Installed versions of the numerical stack and of this package."""
    versions = {"tubed_extension": __version__}
    for name in VERSIONED_MODULES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class ArtifactWriter:
    """
    Writes the artifacts of one run into an output directory.

    Args:
        output_dir: Directory to write into (created on demand)
        config: Run configuration whose hash is embedded in every file
    """

    def __init__(self, output_dir, config: RunConfig):
        self.output_dir = Path(output_dir)
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.written = []

    def provenance(self) -> Dict[str, Any]:
        data = {
            "config_hash": self.config.config_hash(),
            "command": self.config.command,
            "versions": module_versions(),
        }
        if not self.config.deterministic:
            data["generated_at"] = datetime.now(timezone.utc).isoformat()
        return data

    def _path(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / name
        self.written.append(path)
        return path

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        """Write a report with the provenance block under ``provenance``."""
        path = self._path(name)
        document = dict(clean(payload))
        document["provenance"] = self.provenance()
        text = json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False)
        path.write_text(text + "\n", encoding="utf-8")
        self.logger.info(f"Wrote {path}")
        return path

    def write_grid(self, name: str, values: np.ndarray, sidecar: Dict[str, Any]) -> Path:
        """
        Write ``<name>.npy`` and its JSON sidecar ``<name>.json``.

        The sidecar records the array shape and dtype next to the given fields.
        """
        path = self._path(f"{name}.npy")
        np.save(path, np.ascontiguousarray(values, dtype=float), allow_pickle=False)
        meta = dict(sidecar)
        meta["array"] = {"file": path.name, "shape": list(values.shape), "dtype": "float64"}
        self.write_json(f"{name}.json", meta)
        return path

    def write_distribution_csv(self, name: str, report: DistributionReport) -> Path:
        """Plot data (t, mu(t)); the first row is t = 0 with the support measure."""
        path = self._path(name)
        rows = np.column_stack([np.append(0.0, report.thresholds), np.append(report.support_measure, report.mu)])
        with open(path, "w", encoding="utf-8", newline="") as file:
            file.write(f"# config_hash: {self.config.config_hash()}\n")
            file.write(f"# measure: {report.measure}\n")
            file.write("t,mu\n")
            np.savetxt(file, rows, delimiter=",", fmt="%.12g")
        self.logger.info(f"Wrote {path} ({rows.shape[0]} rows)")
        return path

    def summary(self, exit_code: int, failed_invariant: Optional[str] = None) -> Dict[str, Any]:
        return {"files": [p.name for p in self.written], "exit_code": exit_code,
                "failed_invariant": failed_invariant}
