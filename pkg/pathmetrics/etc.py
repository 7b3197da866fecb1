"""
Ease to confirm (EtC): how easily a reported effect is reproduced by the
path distribution. OFO is the right-truncated probability of landing
below the reported value once above a high quantile; EtC = 1 - OFO.

The score reads the spread across paths as an upper bound on the spread of
the true effect. When that holds, OFO is understated, never overstated.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy import stats

from utils.errors import DomainError

FITS = ("empirical", "gaussian", "student")
MIN_PARAMETRIC_OUTCOMES = 30


@dataclass(frozen=True)
class EtCReport:
    bstar: float
    fit: str
    q: float
    theta: float
    cdf_at_bstar: float
    ofo: float
    etc: float
    n_outcomes: int
    location: float
    scale: float
    nu: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def ofo_from_probability(cdf_at_bstar: float, q: float) -> float:
    """(Phi(b*) - q) / (1 - q) above the q-quantile, 0 below, clipped to [0, 1]."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q}")
    if cdf_at_bstar <= q:
        return 0.0
    return float(np.clip((cdf_at_bstar - q) / (1.0 - q), 0.0, 1.0))


def etc_from_probability(cdf_at_bstar: float, q: float) -> float:
    return 1.0 - ofo_from_probability(cdf_at_bstar, q)


def _distribution(values: np.ndarray, fit: str, nu: float):
    location = float(values.mean())
    if fit == "empirical":
        return None, location, float(values.std(ddof=1)) if values.size > 1 else 0.0
    if values.size < MIN_PARAMETRIC_OUTCOMES:
        raise DomainError(f"A {fit} fit needs at least {MIN_PARAMETRIC_OUTCOMES} outcomes, got {values.size}")
    sd = float(values.std(ddof=1))
    if not sd > 0:
        raise DomainError("Outcomes have zero dispersion, cannot fit a parametric law")
    if fit == "gaussian":
        return stats.norm(loc=location, scale=sd), location, sd
    if nu <= 2:
        raise DomainError(f"Student fit needs nu > 2 for a finite variance, got {nu}")
    scale = sd * np.sqrt((nu - 2.0) / nu)
    return stats.t(df=nu, loc=location, scale=scale), location, scale


def etc_score(outcomes, bstar: float, q: float = 0.9, fit: str = "gaussian", nu: float = 3.0) -> EtCReport:
    """EtC of ``bstar`` against path outcomes (pre-signed so larger is more favorable)

    Args:
        outcomes: Path outcomes, NaN entries ignored
        bstar: Reported effect
        q: Benchmark quantile level
        fit: empirical cdf, moment-matched Gaussian or Student-t(nu)
        nu: Student degrees of freedom

    Returns:
        EtCReport
    """
    if fit not in FITS:
        raise DomainError(f"Unknown fit '{fit}', expected one of {FITS}")
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q}")
    values = np.asarray(outcomes, dtype=float).ravel()
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise DomainError("No finite outcomes to score against")
    law, location, scale = _distribution(values, fit, nu)
    if law is None:
        theta = float(np.quantile(values, q))
        cdf = float(np.mean(values <= bstar))
    else:
        theta = float(law.ppf(q))
        cdf = float(law.cdf(bstar))
    ofo = ofo_from_probability(cdf, q) if bstar > theta else 0.0
    return EtCReport(float(bstar), fit, q, theta, cdf, ofo, 1.0 - ofo, int(values.size), location, scale,
                     nu if fit == "student" else None)
