"""
Loader for manifold and synthetic-metric spec files (JSON or YAML).
"""

import json
import logging
from pathlib import Path
from typing import Any, Union

import yaml

from ..config.manifold_spec import ManifoldSpec, MetricSpec
from ..models.errors import SpecificationError

Spec = Union[ManifoldSpec, MetricSpec]


class SpecLoader:
    """
    Loader for spec files.

    A file with a ``kind`` field describes an embedded manifold; a file with
    a ``model`` field describes a synthetic metric. ``.json`` files go
    through the JSON parser, anything else through ``yaml.safe_load``.
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def load(self, spec_file: Union[str, Path]) -> Spec:
        """
        Load one spec file.

        Raises:
            SpecificationError: If the file cannot be read or parsed, or
                describes neither a manifold nor a metric
        """
        spec_file = Path(spec_file)
        data = self._read(spec_file)
        if not isinstance(data, dict):
            raise SpecificationError(f"Invalid spec structure in {spec_file}")
        try:
            if "kind" in data:
                spec = ManifoldSpec.from_dict(data, source_path=str(spec_file))
            elif "model" in data:
                spec = MetricSpec.from_dict(data)
            else:
                raise ValueError("needs a 'kind' (manifold) or 'model' (metric) field")
        except ValueError as e:
            raise SpecificationError(f"Invalid spec in {spec_file}: {e}")
        self.logger.debug(f"Loaded spec {spec_file.name}: {spec}")
        return spec

    def _read(self, spec_file: Path) -> Any:
        try:
            with open(spec_file, 'r', encoding='utf-8') as file:
                if spec_file.suffix.lower() == ".json":
                    return json.load(file)
                return yaml.safe_load(file)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise SpecificationError(f"Spec parsing error in {spec_file}: {e}")
        except OSError as e:
            raise SpecificationError(f"File read error for {spec_file}: {e}")
