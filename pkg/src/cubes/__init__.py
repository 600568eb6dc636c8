"""
Cubes package: lambda-adic families, classification and the choice of lambda.
"""

from .classification import (classify, counting_bound_check, fit_counting_constant,
                             scan_and_classify, scan_parameters)
from .families import enumerate_cubes, generation_range, make_family
from .lambda_selection import DEFAULT_LAMBDA_CAP, select_lambda

__all__ = [
    'classify',
    'counting_bound_check',
    'fit_counting_constant',
    'scan_and_classify',
    'scan_parameters',
    'enumerate_cubes',
    'generation_range',
    'make_family',
    'DEFAULT_LAMBDA_CAP',
    'select_lambda',
]
