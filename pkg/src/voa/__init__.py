"""Value of access (VoA) for social-network timelines.

Closed-form and numerical evaluators of the expected number of novel
impressions per timeline access, the utility-maximizing access rate, FIFO
timeline simulation over real or synthetic post traces, and overlap
statistics over measured impression logs.
"""

from .analytics import (
    OverlapTable,
    ViewerEcdf,
    coverage_fraction,
    overlap_table,
    pairwise_overlap,
    reorder_fifo,
    viewer_ecdf,
    voa_from_snapshots,
)
from .errors import ConvergenceError, DomainError, TraceFormatError, VoaError
from .kernels import BACKEND
from .model import (
    ModelParams,
    Variant,
    VoaEstimate,
    voa_average_k,
    voa_deterministic,
    voa_exponential,
    voa_poisson_k,
    voa_quadrature_oracle,
    voa_summation_oracle,
)
from .optimizer import (
    OptimalRateResult,
    optimal_access_rate,
    optimal_access_rate_numeric,
    utility,
    utility_gradient,
)
from .records import Impression, Post, Snapshot
from .simulator import (
    AccessSchedule,
    SimConfig,
    VoaCurve,
    VoaPoint,
    build_snapshot,
    simulate_synthetic,
    simulate_trace_fifo,
    sweep_inverse_mu,
    synthetic_poisson_trace,
)
from .traceio import TraceMeta, parse_impressions, parse_posts, trace_meta

__version__ = "0.1.0"
