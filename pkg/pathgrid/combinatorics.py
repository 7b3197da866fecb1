"""
Distance census and the closed-form norm of the path correlation matrix.

For a grid with option counts r_1..r_J the number of paths at distance d
from any fixed path is the elementary symmetric polynomial
e_d(r_1 - 1, ..., r_J - 1), i.e. the coefficient of x^d in
prod_j (1 + (r_j - 1) x).
"""

from itertools import combinations
from typing import Dict

import numpy as np

from pathgrid.grid import StudySpec
from utils.errors import DomainError


def elementary_symmetric(values) -> list:
    """e_0..e_n of the given integers, exact (Python ints)."""
    coefficients = [1]
    for value in values:
        value = int(value)
        coefficients = [a + value * b for a, b in zip(coefficients + [0], [0] + coefficients)]
    return coefficients


def distance_census(spec: StudySpec) -> Dict[int, int]:
    """Map d -> number of paths at distance d from a reference path."""
    counts = elementary_symmetric(r - 1 for r in spec.sizes)
    return {d: count for d, count in enumerate(counts)}


def sigma_norm(spec: StudySpec, rho: float) -> float:
    """Mean absolute entry of the path correlation matrix when Cor = rho^d."""
    if rho == 1:
        return 1.0
    if not 0 <= rho < 1:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    sizes = np.asarray(spec.sizes, dtype=float)
    return float(np.prod((1.0 + rho * (sizes - 1.0)) / sizes))


def n_intervals(spec: StudySpec, n_fixed: int) -> int:
    """Number of hacking intervals when ``n_fixed`` layers are held fixed."""
    sizes = spec.sizes
    if not 0 <= n_fixed <= len(sizes):
        raise DomainError(f"Number of fixed layers must lie in [0, {len(sizes)}], got {n_fixed}")
    total = 0
    for fixed in combinations(range(len(sizes)), n_fixed):
        product = 1
        for j in fixed:
            product *= sizes[j]
        total += product
    return total
