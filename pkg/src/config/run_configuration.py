"""
Run configuration shared by the pipeline and the command-line front end.
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

from ..models.cubes import BOUNDED_MODE, GENERAL_MODE, MODES
from ..models.meshes import is_power_of_two

COMMANDS = ("energy", "extend", "diagnose", "reach", "transport")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# Fields that change where or how loudly a run reports, not what it computes.
UNHASHED_FIELDS = ("output", "log_level")


@dataclass
class RunConfig:
    """
    Configuration of one run.

    Attributes:
        command: Subcommand to execute
        manifold_spec: Path of the manifold or synthetic-metric spec file
        map_ref: Map file path or ``builtin:<name>``
        mode: "general" or "bounded"
        eta: Threshold fraction in (0, 1)
        C1: Calibration constant of the lambda formula
        mesh: Horizontal slab cells (power of two); builtin maps use it too
        slab_min: Floor factor, h_min = slab_min * 2W
        slab_height: Height factor, h_max = slab_height * W
        output: Output directory
        deterministic: Pin seeds and serialization for byte-identical output
        threads: Worker threads
        log_level: Logging level
        lambda_cap: Largest lambda used to build cube families
        tau_samples: Sampled tau values per scan
        h_samples: Sampled lattice offsets per axis per scan
        safety: Safety factor of the good/bad threshold
        ball_grid: Cells per axis of the unit-ball grid (0 disables it)
        reach_samples: Samples of the sampled reach estimate
        verify: Fit and validate the estimate constants on the builtin map families
    """
    command: str = "extend"
    manifold_spec: Optional[str] = None
    map_ref: Optional[str] = None
    mode: str = GENERAL_MODE
    eta: float = 0.5
    C1: float = 0.01
    mesh: int = 1024
    slab_min: float = 2.0 ** -9
    slab_height: float = 8.0
    output: str = "out"
    deterministic: bool = False
    threads: int = 1
    log_level: str = "INFO"
    lambda_cap: float = 64.0
    tau_samples: int = 8
    h_samples: int = 8
    safety: float = 0.9
    ball_grid: int = 256
    reach_samples: int = 256
    verify: bool = True

    def __post_init__(self):
        """Validate configuration after initialization."""
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command '{self.command}'. Supported commands: {list(COMMANDS)}")
        if self.mode not in MODES:
            raise ValueError(f"Invalid mode: {self.mode}")
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not self.C1 > 0:
            raise ValueError(f"C1 must be positive, got {self.C1}")
        if not is_power_of_two(self.mesh) or self.mesh < 16:
            raise ValueError(f"Mesh size must be a power of two >= 16, got {self.mesh}")
        if self.threads < 1:
            raise ValueError("Thread count must be at least 1")
        self.log_level = self.log_level.upper()
        if self.log_level not in LOG_LEVELS:
            raise ValueError(f"Invalid log level: {self.log_level}")
        if not self.lambda_cap >= 2:
            raise ValueError(f"Lambda cap must be at least 2, got {self.lambda_cap}")
        if self.tau_samples < 1 or self.h_samples < 1:
            raise ValueError("Scan sample counts must be positive")
        if not 0 < self.safety <= 1:
            raise ValueError(f"Safety factor must lie in (0, 1], got {self.safety}")
        if self.ball_grid and (not is_power_of_two(self.ball_grid) or self.ball_grid < 16):
            raise ValueError(f"Ball grid must be 0 or a power of two >= 16, got {self.ball_grid}")
        if not self.slab_height > 0:
            raise ValueError("Slab height factor must be positive")
        if not 0 < self.slab_min < 1:
            raise ValueError(f"Slab floor factor must lie in (0, 1), got {self.slab_min}")

    @property
    def is_bounded(self) -> bool:
        return self.mode == BOUNDED_MODE

    @property
    def height_levels(self) -> int:
        return max(4, self.mesh // 16)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if not math.isfinite(self.lambda_cap):
            data["lambda_cap"] = "inf"
        return data

    def config_hash(self) -> str:
        """sha256 of the computation-relevant fields, stable across runs."""
        data = {k: v for k, v in self.to_dict().items() if k not in UNHASHED_FIELDS}
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode("utf-8")).hexdigest()

    def changed_fields(self, other: "RunConfig") -> List[str]:
        """Names of fields whose values differ from another configuration."""
        mine, theirs = self.to_dict(), other.to_dict()
        return sorted(k for k in mine if mine[k] != theirs[k])

    def __str__(self) -> str:
        return f"RunConfig({self.command}, mode={self.mode}, mesh={self.mesh}, threads={self.threads})"
