#!/usr/bin/env python3
"""
Startup script for the tubed-extension command line.
"""

import os
import sys
from pathlib import Path

repo_root = Path(__file__).parent

# Only set defaults that the environment does not already provide
if "TUBED_OUT" not in os.environ:
    os.environ["TUBED_OUT"] = str(repo_root / "out")
if "TUBED_LOG_LEVEL" not in os.environ:
    os.environ["TUBED_LOG_LEVEL"] = "INFO"
if "TUBED_DETERMINISTIC" not in os.environ:
    os.environ["TUBED_DETERMINISTIC"] = "true"

sys.path.insert(0, str(repo_root))

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
