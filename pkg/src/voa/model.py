"""Expected number of novel impressions per timeline access.

All evaluators assume posts arrive as a Poisson process of rate ``lam`` (posts
per hour) and that a timeline shows at most ``k`` posts, so an access after
``A`` arrivals yields ``min(A, k)`` novel impressions.  The variants differ in
how the time between accesses (or the timeline size) is distributed:

* fixed K, exponential inter-access times (closed form),
* average K, the same closed form evaluated at a real-valued size,
* Poisson K, timeline size itself Poisson distributed,
* deterministic inter-access time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from scipy import integrate

from .errors import ConvergenceError, DomainError
from .kernels import geometric_moment_sums, truncated_poisson_mean

# quadrature truncation: the exponential density beyond the cut holds this much mass
_TAIL_MASS = 1e-12
_QUAD_TOL = 1e-8
_MAX_SUMMATION_K = 10**6


class Variant(str, enum.Enum):
    FIXED_K = "fixed"
    AVERAGE_K = "average"
    POISSON_K = "poisson"
    DETERMINISTIC_TAU = "deterministic"


@dataclass(frozen=True)
class ModelParams:
    """Arrival rate, access rate, timeline size and per-access cost.

    ``mu`` may be zero here because the utility is defined (as 0) at ``mu = 0``;
    the VoA evaluators themselves reject it.
    """

    lam: float
    mu: float
    k: float
    cost: float = 0.0

    def __post_init__(self):
        for name in ("lam", "mu", "k", "cost"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")

    @property
    def rho(self) -> float:
        """Mean number of posts created between two accesses."""
        if self.mu == 0:
            return math.inf
        return self.lam / self.mu


@dataclass(frozen=True)
class VoaEstimate:
    mean: float
    variant: Variant
    fill_probability: Optional[float] = None


def _require_positive_mu(mu):
    if not mu > 0:
        raise DomainError(f"access rate mu must be > 0, got {mu!r}")


def _require_integer_k(k) -> int:
    if isinstance(k, bool) or not float(k).is_integer() or k < 0:
        raise DomainError(f"timeline size must be a non-negative integer, got {k!r}")
    return int(k)


def _one_minus_power(lam, mu, k):
    """``1 - (lam / (lam + mu))**k`` without cancellation for small mu/lam."""
    if k == 0:
        return 0.0
    if lam == 0:
        return 1.0
    return -math.expm1(-k * math.log1p(mu / lam))


def voa_exponential(params: ModelParams) -> VoaEstimate:
    """Closed-form VoA for exponentially distributed times between accesses.

    ``mean = (lam/mu) * (1 - (lam/(lam+mu))**k)`` and ``fill_probability`` is
    ``(lam/(lam+mu))**k``, the chance that at least ``k`` posts arrived since
    the previous access.  ``k`` may be any real ``>= 0``.
    """
    _require_positive_mu(params.mu)
    lam, mu, k = params.lam, params.mu, params.k
    q = _one_minus_power(lam, mu, k)
    return VoaEstimate(mean=lam / mu * q, variant=Variant.FIXED_K, fill_probability=1.0 - q)


def voa_summation_oracle(params: ModelParams) -> float:
    """VoA from the explicit finite double sum, used to check the closed form.

    ``k - (mu/(lam+mu)) * (k * sum r**i - sum i * r**i)`` over ``i = 0..k``
    with ``r = lam/(lam+mu)``.
    """
    _require_positive_mu(params.mu)
    k = _require_integer_k(params.k)
    if k > _MAX_SUMMATION_K:
        raise DomainError(f"k must be <= {_MAX_SUMMATION_K} for the summation, got {k}")
    lam, mu = params.lam, params.mu
    s0, s1 = geometric_moment_sums(lam / (lam + mu), k)
    return k - mu / (lam + mu) * (k * s0 - s1)


def voa_deterministic(lam: float, tau: float, k: int) -> float:
    """VoA when accesses are exactly ``tau`` hours apart.

    This is ``E[min(A, k)]`` with ``A ~ Poisson(lam * tau)``.
    """
    if not (math.isfinite(lam) and lam >= 0):
        raise DomainError(f"lam must be finite and >= 0, got {lam!r}")
    if not (math.isfinite(tau) and tau >= 0):
        raise DomainError(f"tau must be finite and >= 0, got {tau!r}")
    k = _require_integer_k(k)
    return truncated_poisson_mean(lam * tau, k)


def voa_poisson_k(lam: float, mu: float, alpha: float) -> float:
    """VoA when the delivered timeline size is Poisson with mean ``alpha``."""
    _require_positive_mu(mu)
    if not (math.isfinite(lam) and lam >= 0):
        raise DomainError(f"lam must be finite and >= 0, got {lam!r}")
    if not (math.isfinite(alpha) and alpha >= 0):
        raise DomainError(f"alpha must be finite and >= 0, got {alpha!r}")
    return lam / mu * -math.expm1(-alpha * mu / (lam + mu))


def voa_average_k(lam: float, mu: float, alpha: float) -> float:
    """Fixed-K closed form evaluated at the real-valued mean size ``alpha``."""
    return voa_exponential(ModelParams(lam=lam, mu=mu, k=alpha)).mean


def voa_quadrature_oracle(params: ModelParams) -> float:
    """Integrate ``E(V | tau)`` against the exponential density numerically.

    The integral is cut where the remaining exponential mass drops below
    1e-12.  Raises :class:`ConvergenceError` if the estimated absolute error
    exceeds 1e-8.
    """
    _require_positive_mu(params.mu)
    k = _require_integer_k(params.k)
    lam, mu = params.lam, params.mu
    if lam == 0 or k == 0:
        return 0.0
    upper = -math.log(_TAIL_MASS) / mu

    def integrand(tau):
        return truncated_poisson_mean(lam * tau, k) * mu * math.exp(-mu * tau)

    # breakpoints where E(V|tau) bends (lam * tau ~ k) and where the density has decayed
    points = sorted({min(k / lam, upper * 0.5), 1.0 / mu})
    value, abserr = integrate.quad(
        integrand, 0.0, upper, points=points, epsabs=1e-11, epsrel=1e-11, limit=500
    )
    if not abserr <= _QUAD_TOL:
        raise ConvergenceError(
            f"quadrature error estimate {abserr:.3g} exceeds {_QUAD_TOL:g} "
            f"(lam={lam}, mu={mu}, k={k})"
        )
    return value
