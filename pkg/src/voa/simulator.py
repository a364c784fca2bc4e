"""FIFO timeline simulation, trace-driven and synthetic.

A FIFO timeline of size ``k`` shows the ``k`` most recent posts.  Given a
trace sorted by ``(created_at, id)``, the timeline seen at an access is a
contiguous block of trace indices ending at the newest visible post, so a
round of accesses reduces to a non-decreasing array of end indices and the
novelty of every access follows from one scan (:func:`voa.kernels.fifo_novelty`).

Access schedules:

``random-reference``
    each snapshot is anchored on a post drawn uniformly from the trace
    (without replacement when the trace is large enough), and snapshots are
    replayed in the order of their reference posts;
``exponential``
    access times form a Poisson process of rate ``1/sample_interval_hours``;
``deterministic``
    accesses every ``sample_interval_hours``.

Every round uses its own generator seeded from ``(seed, round_index)`` and
starts with nothing seen.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError
from .kernels import fifo_novelty
from .model import ModelParams, voa_deterministic, voa_exponential
from .records import Post
from .traceio import trace_meta

_SEED_MASK = (1 << 64) - 1


class AccessSchedule(str, enum.Enum):
    RANDOM_REFERENCE = "random-reference"
    EXPONENTIAL_CLOCK = "exponential"
    DETERMINISTIC_CLOCK = "deterministic"


class AbscissaKind(str, enum.Enum):
    INVERSE_MU = "inverse_mu"
    K = "k"
    MU = "mu"
    RHO = "rho"
    LAMBDA = "lambda"


@dataclass(frozen=True)
class SimConfig:
    k: int
    sample_interval_hours: float
    period_hours: float
    rounds: int = 30
    seed: int = 0
    access_schedule: AccessSchedule = AccessSchedule.RANDOM_REFERENCE

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be an integer >= 1, got {self.k!r}")
        if not (math.isfinite(self.sample_interval_hours) and self.sample_interval_hours > 0):
            raise DomainError(f"sample interval must be > 0, got {self.sample_interval_hours!r}")
        if not (math.isfinite(self.period_hours) and self.period_hours > 0):
            raise DomainError(f"period must be > 0, got {self.period_hours!r}")
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise DomainError(f"rounds must be an integer >= 1, got {self.rounds!r}")
        object.__setattr__(self, "access_schedule", AccessSchedule(self.access_schedule))
        if self.snapshots_per_round < 1:
            raise DomainError("period shorter than one sample interval")

    @property
    def snapshots_per_round(self) -> int:
        return math.floor(self.period_hours / self.sample_interval_hours)


@dataclass(frozen=True)
class VoaPoint:
    """Mean VoA at one abscissa, with the spread of the per-round means."""

    abscissa: float
    mean_voa: float
    std_voa: float
    rounds: int
    model_voa: Optional[float] = None

    @property
    def stderr(self) -> float:
        return self.std_voa / math.sqrt(self.rounds)


@dataclass(frozen=True)
class VoaCurve:
    points: list[VoaPoint]
    abscissa_kind: AbscissaKind = AbscissaKind.INVERSE_MU
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = [p.abscissa for p in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("curve abscissas must be strictly increasing")


def round_rng(seed: int, round_index: int) -> np.random.Generator:
    """Generator for one round; distinct ``(seed, round_index)`` give distinct streams."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & _SEED_MASK, int(round_index)]))


def _summarize(abscissa, round_means, model=None) -> VoaPoint:
    arr = np.asarray(round_means, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return VoaPoint(
        abscissa=float(abscissa),
        mean_voa=float(arr.mean()),
        std_voa=std,
        rounds=int(arr.size),
        model_voa=model,
    )


def build_snapshot(posts_sorted_by_time: Sequence[Post], reference_index: int, k: int) -> list[Post]:
    """The reference post and up to ``k - 1`` posts before it, newest first."""
    n = len(posts_sorted_by_time)
    if not 0 <= reference_index < n:
        raise IndexError(f"reference index {reference_index} out of range for {n} posts")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    lo = max(reference_index - k + 1, 0)
    return [posts_sorted_by_time[i] for i in range(reference_index, lo - 1, -1)]


def fifo_voas(reference_indices, k: int) -> np.ndarray:
    """Novel posts per snapshot for windows ending at the given trace indices.

    Snapshots are replayed in order of their reference index; ``-1`` denotes
    an access before the first post (an empty timeline).
    """
    hi = np.sort(np.asarray(reference_indices, dtype=np.int64), kind="stable")
    return fifo_novelty(hi, int(k))


def post_hours(posts: Sequence[Post]) -> np.ndarray:
    """Creation times in hours since the first post of the trace."""
    if not posts:
        return np.zeros(0)
    t0 = posts[0].created_at
    return np.array([(p.created_at - t0).total_seconds() / 3600.0 for p in posts])


def _exponential_times(rng, interval, period):
    times = []
    t = 0.0
    chunk = max(16, int(period / interval * 1.2) + 16)
    while True:
        for gap in rng.exponential(interval, size=chunk):
            t += gap
            if t > period:
                return np.asarray(times)
            times.append(t)


def clock_access_times(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Access instants (hours from the trace start) under a clock schedule."""
    if config.access_schedule is AccessSchedule.EXPONENTIAL_CLOCK:
        return _exponential_times(rng, config.sample_interval_hours, config.period_hours)
    if config.access_schedule is AccessSchedule.DETERMINISTIC_CLOCK:
        return config.sample_interval_hours * np.arange(1, config.snapshots_per_round + 1)
    raise DomainError("random-reference accesses have no clock times")


def access_end_indices(times: np.ndarray, config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Sorted end indices of the windows seen during one simulated round."""
    if config.access_schedule is AccessSchedule.RANDOM_REFERENCE:
        n = len(times)
        m = config.snapshots_per_round
        return np.sort(rng.choice(n, size=m, replace=n < m))
    at = clock_access_times(config, rng)
    return np.searchsorted(times, at, side="right").astype(np.int64) - 1


def simulate_trace_round(times: np.ndarray, config: SimConfig, round_index: int) -> np.ndarray:
    """Per-snapshot VoA for one round over a trace given as sorted post hours."""
    rng = round_rng(config.seed, round_index)
    return fifo_novelty(access_end_indices(times, config, rng), config.k)


def simulate_trace_fifo(posts: Sequence[Post], config: SimConfig) -> VoaPoint:
    """Trace-driven FIFO simulation at one sample interval.

    ``posts`` must be sorted by ``(created_at, id)`` as returned by
    :func:`voa.traceio.parse_posts`.  The result holds the mean and standard
    deviation of the per-round mean VoA over ``config.rounds`` rounds.
    """
    if not posts:
        raise DomainError("empty trace")
    times = post_hours(posts)
    means = []
    for r in range(config.rounds):
        v = simulate_trace_round(times, config, r)
        means.append(v.mean() if v.size else 0.0)
    return _summarize(config.sample_interval_hours, means)


def simulate_synthetic(
    params: ModelParams,
    accesses_per_round: int,
    rounds: int,
    seed: int,
    schedule: AccessSchedule = AccessSchedule.EXPONENTIAL_CLOCK,
) -> VoaPoint:
    """Monte Carlo estimate of the VoA under Poisson arrivals.

    Each access sees ``min(A, k)`` novel posts, ``A`` being the number of
    arrivals since the previous access.  ``stderr`` of the result is the
    standard error of the mean across rounds, so use ``rounds >= 2``.
    """
    schedule = AccessSchedule(schedule)
    if schedule is AccessSchedule.RANDOM_REFERENCE:
        raise DomainError("synthetic simulation needs a clock schedule")
    if not params.mu > 0:
        raise DomainError(f"access rate mu must be > 0, got {params.mu!r}")
    if not float(params.k).is_integer():
        raise DomainError(f"k must be an integer, got {params.k!r}")
    if accesses_per_round < 1 or rounds < 1:
        raise DomainError("accesses_per_round and rounds must be >= 1")
    k = int(params.k)
    means = []
    for r in range(rounds):
        rng = round_rng(seed, r)
        if schedule is AccessSchedule.EXPONENTIAL_CLOCK:
            gaps = rng.exponential(1.0 / params.mu, size=accesses_per_round)
        else:
            gaps = np.full(accesses_per_round, 1.0 / params.mu)
        arrivals = rng.poisson(params.lam * gaps)
        means.append(np.minimum(arrivals, k).mean())
    return _summarize(1.0 / params.mu, means)


def _model_voa(lam, inverse_mu, k, schedule):
    if schedule is AccessSchedule.DETERMINISTIC_CLOCK:
        return voa_deterministic(lam, inverse_mu, k)
    return voa_exponential(ModelParams(lam=lam, mu=1.0 / inverse_mu, k=k)).mean


def sweep_inverse_mu(
    source: Union[Sequence[Post], ModelParams],
    config: SimConfig,
    inverse_mu_values: Sequence[float],
    lam: Optional[float] = None,
) -> VoaCurve:
    """Simulate at each mean inter-access time and pair it with the model.

    ``source`` is either a trace (list of posts) or :class:`ModelParams` for
    a synthetic run; in the synthetic case each round makes
    ``floor(period / interval)`` accesses.  The model column uses ``lam`` if
    given, else ``source.lam`` or the trace's estimated rate, and the
    deterministic-interval formula when the schedule is deterministic.
    """
    xs = [float(x) for x in inverse_mu_values]
    if not xs:
        raise DomainError("no abscissa values")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise DomainError("inverse_mu values must be strictly increasing")
    synthetic = isinstance(source, ModelParams)
    if lam is None:
        lam = source.lam if synthetic else trace_meta(source).estimated_lambda
    points = []
    for x in xs:
        cfg = replace(config, sample_interval_hours=x)
        if synthetic:
            p = replace(source, mu=1.0 / x, k=cfg.k)
            pt = simulate_synthetic(p, cfg.snapshots_per_round, cfg.rounds, cfg.seed, cfg.access_schedule)
        else:
            pt = simulate_trace_fifo(source, cfg)
        points.append(replace(pt, abscissa=x, model_voa=_model_voa(lam, x, cfg.k, cfg.access_schedule)))
    return VoaCurve(points=points, abscissa_kind=AbscissaKind.INVERSE_MU, meta={"lambda": lam})


def synthetic_poisson_trace(
    rate: float,
    hours: float,
    seed: int,
    start: datetime = datetime(2018, 8, 16, tzinfo=timezone.utc),
    publishers: int = 30,
) -> list[Post]:
    """A Poisson post trace of ``rate`` posts per hour over ``hours`` hours.

    Creation times are truncated to whole seconds; ids are zero-padded so that
    id order agrees with creation order.
    """
    if rate < 0 or hours <= 0:
        raise DomainError("rate must be >= 0 and hours > 0")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & _SEED_MASK]))
    n = rng.poisson(rate * hours)
    offsets = np.sort(rng.uniform(0.0, hours * 3600.0, size=n)).astype(np.int64)
    owners = rng.integers(0, publishers, size=n)
    width = max(6, len(str(n)))
    return [
        Post(id=f"p{i:0{width}d}", publisher=f"src{int(o):02d}", created_at=start + timedelta(seconds=int(s)))
        for i, (s, o) in enumerate(zip(offsets, owners))
    ]
