"""
Geodesic distance on embedded manifolds.

Analytic kinds use closed forms. Kinds with a global chart but no closed
form use Dijkstra shortest paths on a refined parameter lattice whose edges
carry the metric length of the straight parameter segment; point clouds use
a nearest-neighbour graph. Graph distances are refined until successive
distance matrices agree to GRAPH_TOLERANCE in relative sup norm.
"""

import itertools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from ..models.manifolds import EmbeddedManifold, PointCloud
from .projection import MESH_TOLERANCE, assert_on_manifold

logger = logging.getLogger(__name__)

GRAPH_TOLERANCE = 0.005
BASE_LATTICE = 32
MAX_REFINEMENTS = 4
OFFSET_RADIUS = 4
QUERY_RADIUS = 2.5
POINT_CLOUD_NEIGHBOURS = (8, 12, 16)

ANALYTIC = "analytic"
GRAPH = "graph"


def primitive_offsets(dimension: int, radius: int = OFFSET_RADIUS) -> np.ndarray:
    """Lattice offsets with coprime entries in a half-space, |offset| <= radius."""
    if dimension == 1:
        return np.array([[1]])
    offsets = []
    for a, b in itertools.product(range(-radius, radius + 1), repeat=2):
        if (a, b) == (0, 0) or a * a + b * b > radius * radius or math.gcd(a, b) != 1:
            continue
        if a > 0 or (a == 0 and b > 0):
            offsets.append((a, b))
    return np.array(offsets)


class ParameterLattice:
    """
    Regular lattice over a manifold's parameter box with Simpson-rule
    metric edge lengths.
    """

    def __init__(self, manifold: EmbeddedManifold, resolution: int):
        domain = manifold.parameter_domain()
        if domain is None:
            raise ValueError(f"{manifold.kind} has no parameter lattice")
        self.manifold = manifold
        self.domain = domain
        self.dimension = len(domain)

        # Periodic axes get `resolution` cells; other axes match their metric spacing.
        mean_metric = np.mean(np.diagonal(manifold.intrinsic_metric(manifold.parameter_grid(64)),
                                          axis1=1, axis2=2), axis=0)
        periodic_spacing = [(hi - lo) / resolution * math.sqrt(g)
                            for (lo, hi, periodic), g in zip(domain, mean_metric) if periodic]
        target = min(periodic_spacing) if periodic_spacing else None
        self.counts: List[int] = []
        self.spacing: List[float] = []
        for (lo, hi, periodic), g in zip(domain, mean_metric):
            if periodic:
                count = resolution
            else:
                cells = resolution if target is None else max(4, int(math.ceil((hi - lo) * math.sqrt(g) / target)))
                count = cells + 1
            self.counts.append(count)
            self.spacing.append((hi - lo) / (count if periodic else count - 1))
        self.lows = np.array([lo for lo, _, _ in domain])
        self.periodic = np.array([p for _, _, p in domain])
        self.spacing_array = np.array(self.spacing)

        axes = [lo + self.spacing[i] * np.arange(self.counts[i]) for i, (lo, _, _) in enumerate(domain)]
        grids = np.meshgrid(*axes, indexing="ij")
        self.params = np.stack([g.ravel() for g in grids], axis=-1)
        self.node_count = self.params.shape[0]

    def segment_length(self, start: np.ndarray, delta: np.ndarray) -> np.ndarray:
        """Simpson estimate of the metric length of start + s delta, s in [0, 1]."""
        total = np.zeros(start.shape[0])
        for weight, s in ((1.0, 0.0), (4.0, 0.5), (1.0, 1.0)):
            metric = self.manifold.intrinsic_metric(start + s * delta)
            total += weight * np.sqrt(np.einsum("ka,kab,kb->k", delta, metric, delta))
        return total / 6.0

    def _flat_index(self, multi: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(tuple(multi.T), tuple(self.counts))

    def _wrap(self, multi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        counts = np.array(self.counts)
        wrapped = np.where(self.periodic, np.mod(multi, counts), multi)
        valid = np.all((wrapped >= 0) & (wrapped < counts), axis=1)
        return wrapped, valid

    def edges(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        multi = np.stack(np.unravel_index(np.arange(self.node_count), tuple(self.counts)), axis=-1)
        rows, cols, weights = [], [], []
        for offset in primitive_offsets(self.dimension):
            target, valid = self._wrap(multi + offset)
            delta = np.broadcast_to(offset * self.spacing_array, (int(valid.sum()), self.dimension))
            lengths = self.segment_length(self.params[valid], delta)
            rows.append(np.flatnonzero(valid))
            cols.append(self._flat_index(target[valid]))
            weights.append(lengths)
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(weights)

    def query_edges(self, query_params: np.ndarray, first_id: int):
        """Edges joining query nodes (ids from first_id) to nearby lattice nodes and to each other."""
        rows, cols, weights = [], [], []
        reach = int(math.ceil(QUERY_RADIUS))
        base = np.floor((query_params - self.lows) / self.spacing_array).astype(int)
        for shift in itertools.product(range(-reach + 1, reach + 1), repeat=self.dimension):
            multi, valid = self._wrap(base + np.array(shift))
            node = self.params[self._flat_index(np.where(valid[:, None], multi, 0))]
            delta = node - query_params
            period = np.array([hi - lo for lo, hi, _ in self.domain])
            delta = np.where(self.periodic, (delta + period / 2) % period - period / 2, delta)
            close = valid & (np.max(np.abs(delta) / self.spacing_array, axis=1) <= QUERY_RADIUS)
            if not np.any(close):
                continue
            lengths = self.segment_length(query_params[close], delta[close])
            rows.append(first_id + np.flatnonzero(close))
            cols.append(self._flat_index(multi[close]))
            weights.append(lengths)

        count = query_params.shape[0]
        if count > 1:
            period = np.array([hi - lo for lo, hi, _ in self.domain])
            for i in range(count):
                delta = query_params[i + 1:] - query_params[i]
                delta = np.where(self.periodic, (delta + period / 2) % period - period / 2, delta)
                close = np.max(np.abs(delta) / self.spacing_array, axis=1) <= QUERY_RADIUS
                if not np.any(close):
                    continue
                start = np.broadcast_to(query_params[i], (int(close.sum()), self.dimension))
                rows.append(np.full(int(close.sum()), first_id + i))
                cols.append(first_id + i + 1 + np.flatnonzero(close))
                weights.append(self.segment_length(start, delta[close]))
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(weights)

    def distances(self, query_params: np.ndarray) -> np.ndarray:
        """Shortest-path distance matrix between query parameters."""
        count = query_params.shape[0]
        rows, cols, weights = self.edges()
        q_rows, q_cols, q_weights = self.query_edges(query_params, self.node_count)
        rows = np.concatenate([rows, q_rows])
        cols = np.concatenate([cols, q_cols])
        # Coincident queries are joined by zero-length edges, which sparse storage drops.
        weights = np.maximum(np.concatenate([weights, q_weights]), 1e-300)
        size = self.node_count + count
        graph = coo_matrix((weights, (rows, cols)), shape=(size, size)).tocsr()
        ids = np.arange(self.node_count, size)
        logger.debug(f"Lattice graph: {size} nodes, {weights.size} edges, {count} sources")
        table = dijkstra(graph, directed=False, indices=ids)[:, ids]
        table = np.minimum(table, table.T)
        np.fill_diagonal(table, 0.0)
        return table


def _relative_change(previous: np.ndarray, current: np.ndarray) -> float:
    scale = np.max(current) if current.size else 0.0
    if scale <= 0:
        return 0.0
    return float(np.max(np.abs(current - previous)) / scale)


def lattice_distances(manifold: EmbeddedManifold, points: np.ndarray,
                      base_resolution: int = BASE_LATTICE) -> np.ndarray:
    """Refinement-converged lattice distances between points on the manifold."""
    params = manifold.inverse_chart(points)
    previous: Optional[np.ndarray] = None
    resolution = base_resolution
    for level in range(MAX_REFINEMENTS + 1):
        current = ParameterLattice(manifold, resolution).distances(params)
        if previous is not None:
            change = _relative_change(previous, current)
            logger.debug(f"Lattice level {level} (resolution {resolution}): relative change {change:.3g}")
            if change < GRAPH_TOLERANCE:
                return current
        previous = current
        resolution *= 2
    logger.warning(f"Lattice geodesics on {manifold.kind} did not reach {GRAPH_TOLERANCE:.1%} "
                   f"agreement; using resolution {resolution // 2}")
    return previous


def point_cloud_distances(cloud: PointCloud, points: np.ndarray) -> np.ndarray:
    """Nearest-neighbour graph distances between the samples nearest to the points."""
    _, nearest = cKDTree(cloud.points).query(points)
    tree = cKDTree(cloud.points)
    previous = None
    for neighbours in POINT_CLOUD_NEIGHBOURS:
        k = min(neighbours + 1, cloud.points.shape[0])
        lengths, indices = tree.query(cloud.points, k=k)
        rows = np.repeat(np.arange(cloud.points.shape[0]), k - 1)
        graph = coo_matrix((np.maximum(lengths[:, 1:].ravel(), 1e-300), (rows, indices[:, 1:].ravel())),
                           shape=(cloud.points.shape[0],) * 2).tocsr()
        unique, inverse = np.unique(nearest, return_inverse=True)
        table = dijkstra(graph, directed=False, indices=unique)[:, unique][inverse][:, inverse]
        table = np.minimum(table, table.T)
        np.fill_diagonal(table, 0.0)
        if previous is not None and _relative_change(previous, table) < GRAPH_TOLERANCE:
            return table
        previous = table
    logger.warning("Point-cloud geodesics did not converge under neighbour refinement")
    return previous


def choose_method(manifold: EmbeddedManifold, method: Optional[str] = None) -> str:
    if method is not None:
        if method not in (ANALYTIC, GRAPH):
            raise ValueError(f"Unknown geodesic method: {method}")
        return method
    return ANALYTIC if manifold.has_analytic_geodesic else GRAPH


def pairwise_geodesic(manifold: EmbeddedManifold, points, method: Optional[str] = None) -> np.ndarray:
    """
    Geodesic distance matrix between points on the manifold.

    The matrix is symmetric with zero diagonal and never below the chordal
    distance.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    chord = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    if choose_method(manifold, method) == ANALYTIC:
        table = manifold.analytic_geodesic(points[:, None, :], points[None, :, :])
    elif isinstance(manifold, PointCloud):
        table = point_cloud_distances(manifold, points)
    else:
        table = lattice_distances(manifold, points)
    table = np.maximum(table, chord)
    np.fill_diagonal(table, 0.0)
    return table


def geodesic_distance(manifold: EmbeddedManifold, p, q, method: Optional[str] = None) -> float:
    """
    Geodesic distance between two points of the manifold.

    Raises:
        NotOnManifold: If either point fails the membership test
    """
    pair = np.stack([np.asarray(p, dtype=float).ravel(), np.asarray(q, dtype=float).ravel()])
    assert_on_manifold(manifold, pair, MESH_TOLERANCE, what="geodesic endpoint")
    if np.array_equal(pair[0], pair[1]):
        return 0.0
    return float(pairwise_geodesic(manifold, pair, method)[0, 1])


class ValueDistances:
    """
    Geodesic distances between the values of a map, by row blocks.

    Analytic kinds evaluate blocks on demand; graph kinds precompute the
    table over distinct values once.
    """

    def __init__(self, manifold: EmbeddedManifold, values: np.ndarray, method: Optional[str] = None):
        self.manifold = manifold
        self.values = np.asarray(values, dtype=float)
        self.method = choose_method(manifold, method)
        self._table = None
        self._inverse = None
        if self.method == GRAPH:
            unique, inverse = np.unique(self.values, axis=0, return_inverse=True)
            self._unique = unique
            self._inverse = np.asarray(inverse).ravel()
            self._table = pairwise_geodesic(manifold, unique, GRAPH)

    def subset(self, indices: np.ndarray) -> "ValueDistances":
        """Distances between the values at ``indices``, sharing any precomputed table."""
        clone = object.__new__(ValueDistances)
        clone.manifold = self.manifold
        clone.values = self.values[indices]
        clone.method = self.method
        clone._table = self._table
        clone._inverse = None if self._inverse is None else self._inverse[indices]
        if self._table is not None:
            clone._unique = self._unique
        return clone

    def rows(self, rows: range) -> np.ndarray:
        if self._table is None:
            return self.manifold.analytic_geodesic(self.values[rows.start:rows.stop, None, :],
                                                   self.values[None, :, :])
        return self._table[self._inverse[rows.start:rows.stop]][:, self._inverse]

    def to_point(self, point: np.ndarray) -> np.ndarray:
        """Distances from every value to one point of the manifold."""
        point = np.asarray(point, dtype=float).ravel()
        if self._table is None:
            return self.manifold.analytic_geodesic(self.values, point[None, :])
        table = pairwise_geodesic(self.manifold, np.vstack([self._unique, point]), GRAPH)
        return table[self._inverse, -1]
