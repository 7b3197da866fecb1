"""
Post-estimation treatments of a path's focal estimate.

A treatment maps the estimate record {b, se_iid, se_hac, se, t} to a new
record. "none" and "adjusted" are both the identity until an adjustment is
registered under that name.
"""

from typing import Callable, Dict

from utils.errors import SpecValidationError

PostTreatment = Callable[[Dict[str, float]], Dict[str, float]]

_TREATMENTS: Dict[str, PostTreatment] = {}


def _identity(estimate: Dict[str, float]) -> Dict[str, float]:
    return dict(estimate)


def register_post_treatment(name: str, fn: PostTreatment) -> None:
    """Register (or replace) the treatment applied for option ``name``."""
    if not name:
        raise SpecValidationError("Post-treatment name must be non-empty")
    if not callable(fn):
        raise SpecValidationError(f"Post-treatment '{name}' is not callable")
    _TREATMENTS[name] = fn


def get_post_treatment(name: str) -> PostTreatment:
    try:
        return _TREATMENTS[name]
    except KeyError:
        raise SpecValidationError(f"No post-treatment registered as '{name}', known: {sorted(_TREATMENTS)}") from None


def apply_post_treatment(name: str, estimate: Dict[str, float]) -> Dict[str, float]:
    treated = get_post_treatment(name)(dict(estimate))
    missing = [key for key in estimate if key not in treated]
    if missing:
        raise SpecValidationError(f"Post-treatment '{name}' dropped field(s) {missing}")
    return treated


register_post_treatment("none", _identity)
register_post_treatment("adjusted", _identity)
