"""
Row-block evaluation with a thread pool and ordered reduction.

numpy releases the GIL inside vectorized kernels, so threads give real
parallelism for the pair computations. Results are always returned in block
order, which keeps every reduction independent of the thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

T = TypeVar("T")

logger = logging.getLogger(__name__)


def block_ranges(count: int, block_size: int) -> List[range]:
    """Consecutive index ranges of at most block_size covering range(count)."""
    if block_size < 1:
        raise ValueError("Block size must be positive")
    return [range(start, min(start + block_size, count)) for start in range(0, count, block_size)]


def map_blocks(fn: Callable[[range], T], count: int, block_size: int = 256, threads: int = 1) -> List[T]:
    """
    Evaluate fn on every row block and return the results in block order.

    Args:
        fn: Function of a row range
        count: Number of rows
        block_size: Rows per block
        threads: Worker threads; 1 evaluates inline
    """
    blocks = block_ranges(count, block_size)
    if threads <= 1 or len(blocks) <= 1:
        return [fn(block) for block in blocks]
    logger.debug(f"Evaluating {len(blocks)} blocks on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, blocks))
