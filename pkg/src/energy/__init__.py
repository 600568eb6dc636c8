"""
Energy package: critical Gagliardo energy, truncated energy and gap potential.
"""

from .gagliardo import GagliardoEnergy, RefinementResult
from .pair_sums import ENERGY, EXCESS, GAP, TRUNCATED, PairSumEvaluator, kernel_numerator, tail_integral

__all__ = [
    'GagliardoEnergy',
    'RefinementResult',
    'PairSumEvaluator',
    'kernel_numerator',
    'tail_integral',
    'ENERGY',
    'EXCESS',
    'GAP',
    'TRUNCATED',
]
