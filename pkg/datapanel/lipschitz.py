"""
Lipschitz ratios and bounds for the data-preparation transforms.

``lipschitz_ratio`` measures ||f(d1) - f(d2)||_p / ||d1 - d2||_p for one pair
of inputs; ``lipschitz_bound`` returns the matching analytic constant, which
for variance and standardization depends on the pair itself.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from datapanel.transforms import cumulative_sum, difference, standardize, winsorize
from utils.errors import DomainError

Transform = Union[str, Callable[[np.ndarray], Any]]

RATIO_TOLERANCE = 1e-9


def _remove_rows(vector: np.ndarray, rows: Sequence[int] = ()) -> np.ndarray:
    return np.delete(vector, list(rows))


TRANSFORMS: Dict[str, Callable[..., Any]] = {
    "mean": lambda v: np.mean(v),
    "variance": lambda v: np.var(v),
    "max": lambda v: np.max(v),
    "min": lambda v: np.min(v),
    "difference": difference,
    "cumulative_sum": cumulative_sum,
    "standardize": standardize,
    "winsorize": lambda v, k=1: winsorize(v, k),
    "remove_rows": _remove_rows,
}


def _norm_order(p) -> float:
    if isinstance(p, str) and p.lower() in ("inf", "infinity"):
        return np.inf
    try:
        order = float(p)
    except (TypeError, ValueError):
        raise DomainError(f"Invalid norm order: {p!r}") from None
    if np.isnan(order) or order < 1:
        raise DomainError(f"Norm order must be >= 1 or inf, got {p!r}")
    return order


def _norm(vector: np.ndarray, p: float) -> float:
    return float(np.linalg.norm(np.atleast_1d(vector), ord=p))


def apply_transform(transform: Transform, vector, **params) -> np.ndarray:
    values = np.asarray(vector, dtype=float)
    if callable(transform):
        return np.atleast_1d(np.asarray(transform(values, **params), dtype=float))
    if transform not in TRANSFORMS:
        raise DomainError(f"Unknown transform '{transform}', expected one of {sorted(TRANSFORMS)}")
    return np.atleast_1d(np.asarray(TRANSFORMS[transform](values, **params), dtype=float))


def lipschitz_ratio(transform: Transform, d1, d2, p=2, **params) -> float:
    """Output divergence over input divergence for one pair of vectors."""
    order = _norm_order(p)
    a = np.asarray(d1, dtype=float)
    b = np.asarray(d2, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"Inputs must share a shape, got {a.shape} and {b.shape}")
    numerator = _norm(apply_transform(transform, a, **params) - apply_transform(transform, b, **params), order)
    denominator = _norm(a - b, order)
    if denominator == 0:
        return 0.0 if numerator == 0 else float("inf")
    return numerator / denominator


def _variance_constant(a: np.ndarray, b: np.ndarray, p: float) -> float:
    n = a.size
    d_star = float(np.max(np.abs(a + b)))
    return n ** (-1.0 / p) * (abs(a.mean() + b.mean()) + d_star)


def lipschitz_bound(transform: str, d1, d2, p=2, **params) -> float:
    """Analytic constant c with ||f(d1) - f(d2)||_p <= c ||d1 - d2||_p."""
    order = _norm_order(p)
    a = np.asarray(d1, dtype=float)
    b = np.asarray(d2, dtype=float)
    n = a.size
    if transform == "mean":
        return n ** (-1.0 / order)
    if transform in ("max", "min", "remove_rows"):
        return 1.0
    if transform == "difference":
        return 2.0
    if transform == "cumulative_sum":
        return float(n)
    if transform == "winsorize":
        # valid when both vectors share their rank order
        return 1.0 + params.get("k", 1)
    if transform == "variance":
        return _variance_constant(a, b, order)
    if transform == "standardize":
        if order != 2:
            raise DomainError("The standardization bound is stated for p = 2")
        sd_a, sd_b = a.std(), b.std()
        return (1.0 + (abs(a.mean() + b.mean()) + float(np.max(np.abs(a + b)))) / (sd_a + sd_b)) / sd_b
    raise DomainError(f"No bound known for transform '{transform}'")


def covariance_gap_bound(x1, y1, x2, y2) -> Tuple[float, float]:
    """Observed |cov(x1, y1) - cov(x2, y2)| and its bound (divide-by-N covariance)."""
    x1, y1, x2, y2 = (np.asarray(v, dtype=float) for v in (x1, y1, x2, y2))
    n = x1.size
    observed = abs(np.mean((x1 - x1.mean()) * (y1 - y1.mean())) - np.mean((x2 - x2.mean()) * (y2 - y2.mean())))
    dx, dy = x1 - x2, y1 - y2
    bound = (np.sum(np.abs(y1 - y1.mean())) * (np.max(np.abs(dx)) + abs(dx.mean()))
             + np.sum(np.abs(x2 - x2.mean())) * (np.max(np.abs(dy)) + abs(dy.mean()))) / n
    return float(observed), float(bound)


def compose(chain: Sequence[Tuple[str, Dict[str, Any]]], vector) -> np.ndarray:
    values = np.asarray(vector, dtype=float)
    for name, params in chain:
        values = apply_transform(name, values, **params)
    return values


def compose_bound(chain: Sequence[Tuple[str, Dict[str, Any]]], d1, d2, p=2) -> float:
    """Product of the per-step constants, each evaluated on its own inputs."""
    a = np.asarray(d1, dtype=float)
    b = np.asarray(d2, dtype=float)
    constant = 1.0
    for name, params in chain:
        constant *= lipschitz_bound(name, a, b, p, **params)
        a = apply_transform(name, a, **params)
        b = apply_transform(name, b, **params)
    return constant


@dataclass(frozen=True)
class BoundSuiteResult:
    transform: str
    n_checked: int
    violations: int
    worst_ratio_to_bound: float


def _random_pair(rng: np.random.Generator, length: int, aligned: bool) -> Tuple[np.ndarray, np.ndarray]:
    scale = rng.uniform(0.1, 5.0)
    a = rng.standard_t(4, size=length) * scale + rng.normal()
    if rng.random() < 0.5:
        b = a + rng.normal(scale=rng.uniform(1e-3, 1.0) * scale, size=length)
    else:
        b = rng.standard_t(4, size=length) * rng.uniform(0.1, 5.0) + rng.normal()
    if aligned:
        permutation = rng.permutation(length)
        a = np.sort(a)[permutation]
        b = np.sort(b)[permutation]
    return a, b


def run_bound_suite(transform: str, n_pairs: int = 10_000, length: int = 25, p=1,
                    seed: int = 0, **params) -> BoundSuiteResult:
    """Check the analytic bound on random vector pairs."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(n_pairs):
        if transform == "covariance":
            x1, x2 = _random_pair(rng, length, aligned=False)
            y1, y2 = _random_pair(rng, length, aligned=False)
            observed, bound = covariance_gap_bound(x1, y1, x2, y2)
            ratio = observed / bound if bound > 0 else 0.0
        else:
            a, b = _random_pair(rng, length, aligned=(transform == "winsorize"))
            call_params = dict(params)
            if transform == "remove_rows" and "rows" not in call_params:
                call_params["rows"] = rng.choice(length, size=rng.integers(1, length // 2), replace=False)
            observed = lipschitz_ratio(transform, a, b, p, **call_params)
            bound = lipschitz_bound(transform, a, b, p, **call_params)
            ratio = observed / bound
        worst = max(worst, ratio)
        if ratio > 1.0 + RATIO_TOLERANCE:
            violations += 1
    return BoundSuiteResult(transform, n_pairs, violations, worst)


def run_chain_suite(chain: List[Tuple[str, Dict[str, Any]]], n_pairs: int = 1_000, length: int = 25,
                    p=1, seed: int = 0) -> BoundSuiteResult:
    """Composition check: observed divergence never exceeds the product of constants."""
    rng = np.random.default_rng(seed)
    order = _norm_order(p)
    violations = 0
    worst = 0.0
    for _ in range(n_pairs):
        a, b = _random_pair(rng, length, aligned=False)
        observed = _norm(compose(chain, a) - compose(chain, b), order)
        allowed = compose_bound(chain, a, b, p) * _norm(a - b, order)
        ratio = observed / allowed if allowed > 0 else 0.0
        worst = max(worst, ratio)
        if ratio > 1.0 + RATIO_TOLERANCE:
            violations += 1
    name = " -> ".join(step for step, _ in chain)
    return BoundSuiteResult(name, n_pairs, violations, worst)
