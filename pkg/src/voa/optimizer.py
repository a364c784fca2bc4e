"""Utility per unit time and the access rate that maximizes it.

The utility of accessing at rate ``mu`` is ``mu * V(mu) - cost * mu``, which
with the exponential-model VoA becomes
``lam * (1 - (lam/(lam+mu))**k) - cost * mu``.  It is concave in ``mu``, so
the stationary point of the gradient is the global maximum whenever it is
non-negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError
from .model import ModelParams, _one_minus_power

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimalRateResult:
    mu_star: float
    utility_at_star: float
    clamped: bool


def utility(params: ModelParams) -> float:
    """Utility per hour at access rate ``params.mu`` (0 at ``mu = 0``)."""
    lam, mu, k, c = params.lam, params.mu, params.k, params.cost
    if mu == 0:
        return 0.0
    return lam * _one_minus_power(lam, mu, k) - c * mu


def utility_gradient(params: ModelParams) -> float:
    """Derivative of :func:`utility` with respect to ``mu``."""
    lam, mu, k, c = params.lam, params.mu, params.k, params.cost
    if lam == 0:
        return -c
    return k * (lam / (lam + mu)) ** (k + 1) - c


def _check_optimizer_args(lam, k, c):
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError(f"lam must be > 0, got {lam!r}")
    if not (math.isfinite(c) and c > 0):
        raise DomainError(f"cost must be > 0, got {c!r}")
    if isinstance(k, bool) or not float(k).is_integer() or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    return int(k)


def optimal_access_rate(lam: float, k: int, c: float) -> OptimalRateResult:
    """Closed-form maximizer ``lam * ((k/c)**(1/(k+1)) - 1)``.

    When ``k <= c`` the gradient is non-positive for every ``mu >= 0``, so the
    constrained optimum is ``mu = 0`` and ``clamped`` is set.
    """
    k = _check_optimizer_args(lam, k, c)
    if k <= c:
        return OptimalRateResult(mu_star=0.0, utility_at_star=0.0, clamped=True)
    mu_star = lam * math.expm1(math.log(k / c) / (k + 1))
    u = utility(ModelParams(lam=lam, mu=mu_star, k=k, cost=c))
    return OptimalRateResult(mu_star=mu_star, utility_at_star=u, clamped=False)


def golden_section_max(f, lo, hi, tol=1e-8, max_iter=500):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The bracket shrinks by the golden ratio each step until it is narrower
    than ``tol``.  The end points are compared against the interior estimate
    so that a maximum sitting on the boundary is returned exactly.
    """
    a, b = float(lo), float(hi)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while b - a > tol:
        if it >= max_iter:
            raise ConvergenceError(f"golden section did not reach width {tol:g}")
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        it += 1
    x = 0.5 * (a + b)
    best = (x, f(x))
    for edge in (float(lo), float(hi)):
        fe = f(edge)
        if fe > best[1]:
            best = (edge, fe)
    return best


def optimal_access_rate_numeric(lam: float, k: int, c: float, search_upper: float) -> float:
    """Maximize the utility numerically on ``[0, search_upper]``.

    Independent of the closed form; raises :class:`ConvergenceError` if the
    maximizer lands on ``search_upper``, meaning the interval was too small.
    """
    if not (math.isfinite(search_upper) and search_upper > 0):
        raise DomainError(f"search_upper must be > 0, got {search_upper!r}")
    if not (math.isfinite(lam) and lam >= 0):
        raise DomainError(f"lam must be >= 0, got {lam!r}")

    def f(mu):
        return utility(ModelParams(lam=lam, mu=mu, k=k, cost=c))

    mu, _ = golden_section_max(f, 0.0, search_upper, tol=1e-8)
    if search_upper - mu <= 1e-8:
        raise ConvergenceError(
            f"utility still increasing at search_upper={search_upper}; widen the interval"
        )
    return mu
