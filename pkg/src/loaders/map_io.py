"""
CSV formats: boundary map files and point-cloud samples.

A map file starts with ``# key: value`` header lines (parsed as YAML) and
continues with a node table ``p1..pm, v1..vnu``:

    # name: bump
    # domain: plane_R1_tail
    # resolution: 1024
    # window: 1.0
    # manifold: circle.json
    # L_bound: 1.0
    # tail: [1.0, 0.0]
    p1,v1,v2
    -1.0,1.0,0.0
    ...
"""

import io
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import yaml

from ..models.errors import MapFormatError
from ..models.manifolds import EmbeddedManifold
from ..models.meshes import build_mesh
from ..models.surface_map import SurfaceMap

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# "
PARAM_TOLERANCE = 1e-9
REQUIRED_HEADER = ("domain", "resolution")


def _split(path: Path) -> Tuple[dict, str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise MapFormatError(f"Cannot read map file {path}: {e}")
    header_lines, body_lines = [], []
    for line in text.splitlines():
        if line.startswith("#") and not body_lines:
            header_lines.append(line[1:].strip())
        elif line.strip():
            body_lines.append(line)
    try:
        header = yaml.safe_load("\n".join(header_lines)) or {}
    except yaml.YAMLError as e:
        raise MapFormatError(f"Malformed header in {path}: {e}")
    if not isinstance(header, dict):
        raise MapFormatError(f"Header of {path} must be 'key: value' lines")
    missing = [key for key in REQUIRED_HEADER if key not in header]
    if missing:
        raise MapFormatError(f"Map file {path} lacks header fields {missing}")
    return header, "\n".join(body_lines)


def read_map_header(path: Union[str, Path]) -> dict:
    """Header fields of a map file, without the node table."""
    return _split(Path(path))[0]


def read_surface_map(path: Union[str, Path], manifold: EmbeddedManifold) -> SurfaceMap:
    """
    Read a boundary map file onto the given target manifold.

    Raises:
        MapFormatError: If the header or the node table is malformed, or the
            parameters do not match the declared mesh
    """
    path = Path(path)
    header, body = _split(path)
    try:
        mesh = build_mesh(header["domain"], int(header["resolution"]), window=header.get("window"),
                          dimension=header.get("dimension"))
    except (TypeError, ValueError) as e:
        raise MapFormatError(f"Invalid mesh declared in {path}: {e}")

    lines = body.splitlines()
    if not lines:
        raise MapFormatError(f"Map file {path} has no node table")
    columns = [c.strip() for c in lines[0].split(",")]
    p_cols = [i for i, c in enumerate(columns) if c.startswith("p")]
    v_cols = [i for i, c in enumerate(columns) if c.startswith("v")]
    if len(p_cols) != mesh.params.shape[1] or len(v_cols) != manifold.ambient_dim:
        raise MapFormatError(f"Columns {columns} of {path} do not fit a {mesh.dimension}-dimensional mesh "
                             f"and values in R^{manifold.ambient_dim}")
    try:
        table = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
    except ValueError as e:
        raise MapFormatError(f"Malformed node table in {path}: {e}")
    if table.shape[0] != mesh.node_count:
        raise MapFormatError(f"{path} has {table.shape[0]} nodes, mesh needs {mesh.node_count}")
    if np.max(np.abs(table[:, p_cols] - mesh.params)) > PARAM_TOLERANCE:
        raise MapFormatError(f"Node parameters of {path} do not match the {header['domain']} mesh")

    tail = header.get("tail")
    try:
        surface_map = SurfaceMap(str(header.get("name") or path.stem), mesh, table[:, v_cols], manifold,
                                 tail_value=None if tail is None else np.asarray(tail, dtype=float),
                                 L_bound=header.get("L_bound"), tags=list(header.get("tags") or []))
    except ValueError as e:
        raise MapFormatError(f"Invalid map in {path}: {e}")
    logger.info(f"Read {surface_map} from {path}")
    return surface_map


def write_surface_map(surface_map: SurfaceMap, path: Union[str, Path],
                      manifold_ref: Optional[str] = None) -> Path:
    """Write a map file; values use 17 significant digits so a read returns the same floats."""
    path = Path(path)
    mesh = surface_map.mesh
    header = {"name": surface_map.name, "domain": mesh.domain, "resolution": mesh.resolution,
              "dimension": mesh.dimension, "window": mesh.window, "manifold": manifold_ref,
              "L_bound": surface_map.L_bound,
              "tail": None if surface_map.tail_value is None else [float(v) for v in surface_map.tail_value],
              "tags": surface_map.tags}
    header_text = yaml.safe_dump(header, sort_keys=False, default_flow_style=None).strip()
    columns = [f"p{i + 1}" for i in range(mesh.params.shape[1])]
    columns += [f"v{i + 1}" for i in range(surface_map.values.shape[1])]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        for line in header_text.splitlines():
            file.write(f"{HEADER_PREFIX}{line}\n")
        file.write(",".join(columns) + "\n")
        np.savetxt(file, np.hstack([mesh.params, surface_map.values]), delimiter=",", fmt="%.17g")
    logger.debug(f"Wrote {surface_map.name} to {path}")
    return path


def load_point_cloud_csv(path: Union[str, Path], intrinsic_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Read point-cloud samples with tangent frames.

    Columns are ``x1..xnu`` followed by one block ``tj_1..tj_nu`` per tangent
    vector j = 1..n.

    Returns:
        Points of shape (k, nu) and frames of shape (k, nu, n)

    Raises:
        MapFormatError: If the columns do not match the intrinsic dimension
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as file:
            columns = [c.strip() for c in file.readline().split(",")]
            table = np.loadtxt(file, delimiter=",", ndmin=2)
    except (OSError, ValueError) as e:
        raise MapFormatError(f"Cannot read point cloud {path}: {e}")

    point_cols = [i for i, c in enumerate(columns) if c.startswith("x")]
    nu = len(point_cols)
    if nu == 0 or intrinsic_dim < 1:
        raise MapFormatError(f"Point cloud {path} needs x columns and a positive intrinsic dimension")
    frame_cols = []
    for j in range(1, intrinsic_dim + 1):
        block = [columns.index(f"t{j}_{i}") if f"t{j}_{i}" in columns else -1 for i in range(1, nu + 1)]
        if -1 in block:
            raise MapFormatError(f"Point cloud {path} lacks tangent columns t{j}_1..t{j}_{nu}")
        frame_cols.append(block)
    if table.shape[1] != len(columns):
        raise MapFormatError(f"Point cloud {path} rows do not match its {len(columns)} columns")

    points = table[:, point_cols]
    frames = np.stack([table[:, block] for block in frame_cols], axis=-1)
    logger.debug(f"Loaded {points.shape[0]} samples in R^{nu} from {path}")
    return points, frames
