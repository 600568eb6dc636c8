"""
Sampled Federer reach.

The reach of a closed submanifold equals the infimum over pairs p != q of
|q - p|^2 / (2 dist(q - p, T_p M)). Sampling pairs gives an upper bound that
decreases as the sample set grows.
"""

import logging
from typing import Optional

import numpy as np

from ..models.manifolds import EmbeddedManifold
from ..models.reports import ReachEstimate
from .blocks import map_blocks

logger = logging.getLogger(__name__)

DEFAULT_REACH_SAMPLES = 256
HISTORY_LEVELS = 4


def federer_quotients(points: np.ndarray, frames: np.ndarray, rows: range) -> np.ndarray:
    """
    Federer quotients for the base points ``rows`` against all points.

    Pairs whose chord lies in the tangent space (and the diagonal) get +inf.
    """
    base = points[rows.start:rows.stop]
    frame = frames[rows.start:rows.stop]
    diff = points[None, :, :] - base[:, None, :]
    tangential = np.einsum("bkv,bvn->bkn", diff, frame)
    normal = diff - np.einsum("bkn,bvn->bkv", tangential, frame)
    normal_length = np.linalg.norm(normal, axis=-1)
    chord_sq = np.sum(diff * diff, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        quotient = chord_sq / (2 * normal_length)
    degenerate = normal_length <= 1e-14 * np.sqrt(chord_sq)
    quotient[degenerate | (chord_sq == 0)] = np.inf
    return quotient


def federer_reach(manifold: EmbeddedManifold, sample_count: int = DEFAULT_REACH_SAMPLES,
                  threads: int = 1, seed: int = 0) -> ReachEstimate:
    """
    Estimate the reach by the Federer quotient over sampled pairs.

    Samples are a fixed random ordering of a structured grid; the history
    records the infimum over nested prefixes, so it is nonincreasing.

    Args:
        manifold: Target manifold with tangent frames
        sample_count: Number of sample points (pairs = count * (count - 1))
        threads: Worker threads for the row blocks
        seed: Seed of the sample ordering

    Raises:
        DegenerateTangent: If a tangent frame is rank-deficient
    """
    if sample_count < 2:
        raise ValueError("Federer reach needs at least two samples")

    points, frames, _ = manifold.sample(sample_count)
    order = np.random.default_rng(seed).permutation(points.shape[0])
    points, frames = points[order], frames[order]
    count = points.shape[0]

    blocks = map_blocks(lambda rows: federer_quotients(points, frames, rows), count, 128, threads)
    quotients = np.concatenate(blocks, axis=0)

    history = []
    sizes = sorted({max(2, count >> level) for level in range(HISTORY_LEVELS)})
    for size in sizes:
        history.append((int(size), float(np.min(quotients[:size, :size]))))

    value = history[-1][1]
    exact = manifold.exact_reach()
    logger.debug(f"Federer reach of {manifold.kind} from {count} samples: {value:.6g} (exact {exact})")
    return ReachEstimate(value=value, sample_count=count, monotone_history=history, exact=exact)


def resolve_reach(manifold: EmbeddedManifold, sample_count: int = DEFAULT_REACH_SAMPLES,
                  threads: int = 1) -> float:
    """
    Reach used by the construction: closed form, declared metadata, or a
    cached sampled estimate, in that order.
    """
    declared: Optional[float] = manifold.declared_reach()
    if declared is not None:
        return declared
    if manifold._reach_cache is None:
        manifold._reach_cache = federer_reach(manifold, sample_count, threads).value
        logger.info(f"Sampled reach of {manifold.kind}: {manifold._reach_cache:.6g}")
    return manifold._reach_cache
