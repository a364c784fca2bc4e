"""Command-line interface.

Scalar results are printed as one JSON object, tables as CSV (override with
``--format``).  Numeric flags of ``sweep`` and ``optimize`` accept a range
``start:stop:step`` (stop inclusive) for at most one parameter.

Exit status: 0 success, 2 usage error, 3 I/O error, 4 malformed input,
5 parameter outside a formula's domain, 6 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import enum
import io
import json
import math
import sys
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

from .analytics import (
    coverage_fraction,
    overlap_table,
    pairwise_overlap_from_table,
    reorder_fifo,
    snapshots_by_user,
    viewer_ecdf,
    voa_from_snapshots,
)
from .errors import ConvergenceError, DomainError, TraceFormatError
from .model import (
    ModelParams,
    Variant,
    voa_average_k,
    voa_deterministic,
    voa_exponential,
    voa_poisson_k,
)
from .optimizer import optimal_access_rate
from .simulator import (
    AccessSchedule,
    SimConfig,
    simulate_synthetic,
    simulate_trace_fifo,
    sweep_inverse_mu,
)
from .traceio import Format, parse_impressions, parse_posts, trace_meta, write_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_DOMAIN = 5
EXIT_CONVERGENCE = 6

DEFAULT_PERIOD_HOURS = 336.0


class Subcommand(str, enum.Enum):
    EVAL = "eval"
    SWEEP = "sweep"
    OPTIMIZE = "optimize"
    SIMULATE = "simulate"
    SNAPSHOT_VOA = "snapshot-voa"
    OVERLAP = "overlap"
    ECDF = "ecdf"
    TRACE_INFO = "trace-info"


@dataclass
class Command:
    subcommand: Subcommand
    options: dict = field(default_factory=dict)
    out: Optional[str] = None


def parse_range(text: str) -> list[float]:
    """``"a"`` -> ``[a]``; ``"a:b:s"`` -> ``a, a+s, ...`` up to and including ``b``."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if not step > 0 or stop < start:
        raise ValueError(f"range {text!r} needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _range_arg(text):
    try:
        return parse_range(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voa",
        description="Value of access for social-network timelines: model, optimal access rate, "
        "FIFO simulation and impression-log analytics.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    def common_out(p):
        p.add_argument("--out", help="write the result here instead of standard output")
        p.add_argument("--format", choices=["csv", "json"], help="override the output format")

    def input_format(p):
        p.add_argument(
            "--input-format",
            choices=[f.value for f in Format],
            help="input layout (default: csv for *.csv files, jsonl otherwise)",
        )

    variants = [v.value for v in Variant]

    p = sub.add_parser("eval", help="expected new impressions per access")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="posts per hour")
    p.add_argument("--mu", type=float, required=True, help="accesses per hour")
    p.add_argument("--k", type=float, help="timeline size")
    p.add_argument("--alpha", type=float, help="mean timeline size (average/poisson variants)")
    p.add_argument("--variant", choices=variants, default=Variant.FIXED_K.value)
    p.add_argument("--cost", type=float, help="cost per access; adds the utility to the output")
    common_out(p)

    p = sub.add_parser("sweep", help="model (and optionally simulated) VoA over a parameter grid")
    p.add_argument("--lambda", dest="lam", type=_range_arg, required=True)
    p.add_argument("--mu", type=_range_arg)
    p.add_argument("--rho", type=_range_arg, help="lambda/mu; sets mu")
    p.add_argument("--k", type=_range_arg)
    p.add_argument("--alpha", type=_range_arg)
    p.add_argument("--variant", choices=variants, default=Variant.FIXED_K.value)
    p.add_argument("--cost", type=float, default=1.0)
    p.add_argument(
        "--inverse-mu", type=_range_arg, help="mean hours between accesses; runs a simulated sweep"
    )
    p.add_argument("--simulate", choices=["synthetic", "trace"], default="synthetic")
    p.add_argument("--posts", help="post trace for --simulate trace")
    p.add_argument("--schedule", choices=[s.value for s in AccessSchedule])
    p.add_argument("--seed", type=int)
    p.add_argument("--rounds", type=int, default=30)
    p.add_argument("--period-hours", type=float)
    input_format(p)
    common_out(p)

    p = sub.add_parser("optimize", help="utility-maximizing access rate")
    p.add_argument("--lambda", dest="lam", type=_range_arg, required=True)
    p.add_argument("--k", type=_range_arg, required=True)
    p.add_argument("--cost", type=_range_arg, required=True)
    common_out(p)

    p = sub.add_parser("simulate", help="one simulated VoA point (synthetic or trace-driven)")
    p.add_argument("--lambda", dest="lam", type=float, help="posts per hour (synthetic)")
    p.add_argument("--mu", type=float, help="accesses per hour")
    p.add_argument("--interval-hours", type=float, help="mean hours between accesses (1/mu)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--posts", help="post trace; switches to trace-driven simulation")
    p.add_argument("--schedule", choices=[s.value for s in AccessSchedule])
    p.add_argument("--seed", type=int)
    p.add_argument("--rounds", type=int, default=30)
    p.add_argument("--accesses", type=int, help="accesses per round (synthetic)")
    p.add_argument("--period-hours", type=float)
    input_format(p)
    common_out(p)

    for name, text in (
        ("snapshot-voa", "VoA measured from an impression log"),
        ("overlap", "pairwise post overlap between users"),
        ("ecdf", "ECDF of the number of users that viewed each post"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--impressions", required=True)
        p.add_argument("--truncate-k", type=_range_arg, help="keep positions <= K (range allowed)")
        p.add_argument("--fifo-reorder", action="store_true", help="reorder snapshots newest first")
        input_format(p)
        common_out(p)

    p = sub.add_parser("trace-info", help="trace size, span, rate estimate and daily volume")
    p.add_argument("--posts", required=True)
    input_format(p)
    common_out(p)

    return parser


def _single_range(parser, ns, names):
    ranged = [n for n in names if isinstance(getattr(ns, n), list) and len(getattr(ns, n)) > 1]
    if len(ranged) > 1:
        parser.error(f"only one of {', '.join('--' + n for n in ranged)} may be a range")


def _validate(parser, ns):
    sc = Subcommand(ns.subcommand)
    if sc is Subcommand.EVAL:
        variant = Variant(ns.variant)
        if variant in (Variant.AVERAGE_K, Variant.POISSON_K):
            if ns.alpha is None:
                parser.error(f"--variant {variant.value} requires --alpha")
            if ns.k is not None:
                parser.error(f"--k conflicts with --variant {variant.value}; use --alpha")
        else:
            if ns.k is None:
                parser.error(f"--variant {variant.value} requires --k")
            if ns.alpha is not None:
                parser.error(f"--alpha conflicts with --variant {variant.value}")
    elif sc is Subcommand.SWEEP:
        _single_range(parser, ns, ["lam", "mu", "rho", "k", "alpha", "inverse_mu"])
        if ns.inverse_mu is not None:
            if ns.mu is not None or ns.rho is not None:
                parser.error("--inverse-mu conflicts with --mu/--rho")
            if ns.k is None or len(ns.k) != 1:
                parser.error("a simulated sweep requires a single --k")
            if len(ns.lam) != 1:
                parser.error("a simulated sweep requires a single --lambda")
            if ns.seed is None:
                parser.error("a simulated sweep requires --seed")
            if ns.simulate == "trace" and not ns.posts:
                parser.error("--simulate trace requires --posts")
        else:
            if (ns.mu is None) == (ns.rho is None):
                parser.error("give exactly one of --mu, --rho or --inverse-mu")
            variant = Variant(ns.variant)
            if variant in (Variant.AVERAGE_K, Variant.POISSON_K):
                if ns.alpha is None:
                    parser.error(f"--variant {variant.value} requires --alpha")
                if ns.k is not None:
                    parser.error(f"--k conflicts with --variant {variant.value}; use --alpha")
            else:
                if ns.k is None:
                    parser.error(f"--variant {variant.value} requires --k")
                if ns.alpha is not None:
                    parser.error(f"--alpha conflicts with --variant {variant.value}")
    elif sc is Subcommand.OPTIMIZE:
        _single_range(parser, ns, ["lam", "k", "cost"])
    elif sc is Subcommand.SIMULATE:
        if ns.seed is None:
            parser.error("simulate requires --seed")
        if (ns.mu is None) == (ns.interval_hours is None):
            parser.error("give exactly one of --mu or --interval-hours")
        if ns.posts is None and ns.lam is None:
            parser.error("synthetic simulation requires --lambda (or give --posts)")
        if ns.posts is not None and ns.accesses is not None:
            parser.error("--accesses applies to synthetic simulation only")


def parse_args(argv: Sequence[str]) -> Command:
    """Parse and validate ``argv``; usage errors exit with status 2."""
    parser = _build_parser()
    ns = parser.parse_args(list(argv))
    _validate(parser, ns)
    opts = vars(ns).copy()
    sc = Subcommand(opts.pop("subcommand"))
    out = opts.pop("out", None)
    return Command(subcommand=sc, options=opts, out=out)


def _infer_format(path, explicit):
    if explicit:
        return Format(explicit)
    return Format.CSV if path.lower().endswith(".csv") else Format.JSONL


def _load_posts(path, explicit_format):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_posts(fh, _infer_format(path, explicit_format))


def _load_snapshots(path, explicit_format):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_impressions(fh, _infer_format(path, explicit_format))


@dataclass
class _Result:
    header: Optional[list] = None
    rows: Optional[list] = None
    obj: Optional[dict] = None

    def render(self, fmt: Optional[str]) -> str:
        buf = io.StringIO()
        if self.obj is not None:
            if fmt == "csv":
                write_csv(buf, list(self.obj), [[_csv_value(v) for v in self.obj.values()]])
            else:
                buf.write(json.dumps(self.obj) + "\n")
        else:
            if fmt == "json":
                records = [dict(zip(self.header, row)) for row in self.rows]
                buf.write(json.dumps(records) + "\n")
            else:
                write_csv(buf, self.header, self.rows)
        return buf.getvalue()


def _csv_value(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v)
    return v


def _one(values):
    return values[0] if isinstance(values, list) else values


def _eval_voa(variant, lam, mu, k=None, alpha=None):
    if variant is Variant.FIXED_K:
        est = voa_exponential(ModelParams(lam=lam, mu=mu, k=k))
        return est.mean, est.fill_probability
    if variant is Variant.AVERAGE_K:
        return voa_average_k(lam, mu, alpha), None
    if variant is Variant.POISSON_K:
        return voa_poisson_k(lam, mu, alpha), None
    if not mu > 0:
        raise DomainError(f"access rate mu must be > 0, got {mu!r}")
    return voa_deterministic(lam, 1.0 / mu, k), None


def _run_eval(o):
    variant = Variant(o["variant"])
    voa, fill = _eval_voa(variant, o["lam"], o["mu"], o["k"], o["alpha"])
    obj = {"variant": variant.value, "lambda": o["lam"], "mu": o["mu"]}
    if o["k"] is not None:
        obj["k"] = o["k"]
    if o["alpha"] is not None:
        obj["alpha"] = o["alpha"]
    obj["voa"] = voa
    if fill is not None:
        obj["fill_probability"] = fill
    if o["cost"] is not None:
        obj["utility"] = o["mu"] * voa - o["cost"] * o["mu"]
    return _Result(obj=obj)


def _run_model_sweep(o):
    variant = Variant(o["variant"])
    rows = []
    size_key = "alpha" if variant in (Variant.AVERAGE_K, Variant.POISSON_K) else "k"
    for lam in o["lam"]:
        for size in o[size_key]:
            mus = o["mu"] if o["mu"] is not None else [lam / r for r in o["rho"]]
            for mu in mus:
                k = size if size_key == "k" else None
                alpha = size if size_key == "alpha" else None
                voa, _ = _eval_voa(variant, lam, mu, k, alpha)
                rows.append([lam, mu, size, lam / mu, voa, mu * voa - o["cost"] * mu])
    return _Result(header=["lambda", "mu", size_key, "rho", "voa", "utility"], rows=rows)


def _schedule(o, default):
    return AccessSchedule(o["schedule"]) if o.get("schedule") else default


def _run_sim_sweep(o):
    lam = o["lam"][0]
    k = o["k"][0]
    if not float(k).is_integer():
        raise DomainError(f"k must be an integer for simulation, got {k}")
    k = int(k)
    xs = o["inverse_mu"]
    if o["simulate"] == "trace":
        posts = _load_posts(o["posts"], o["input_format"])
        period = o["period_hours"] or trace_meta(posts).time_span_hours
        schedule = _schedule(o, AccessSchedule.RANDOM_REFERENCE)
        source = posts
    else:
        period = o["period_hours"] or DEFAULT_PERIOD_HOURS
        schedule = _schedule(o, AccessSchedule.EXPONENTIAL_CLOCK)
        source = ModelParams(lam=lam, mu=1.0 / xs[0], k=k)
    cfg = SimConfig(
        k=k,
        sample_interval_hours=xs[0],
        period_hours=period,
        rounds=o["rounds"],
        seed=o["seed"],
        access_schedule=schedule,
    )
    curve = sweep_inverse_mu(source, cfg, xs, lam=lam)
    rows = [[p.abscissa, p.model_voa, p.mean_voa, p.std_voa, p.rounds] for p in curve.points]
    return _Result(header=["inverse_mu", "model_voa", "sim_mean", "sim_std", "rounds"], rows=rows)


def _run_optimize(o):
    rows = []
    for lam in o["lam"]:
        for k in o["k"]:
            for c in o["cost"]:
                res = optimal_access_rate(lam, k, c)
                rows.append([lam, int(k) if float(k).is_integer() else k, c,
                             res.mu_star, res.utility_at_star, res.clamped])
    header = ["lambda", "k", "cost", "mu_star", "utility_at_star", "clamped"]
    if len(rows) == 1:
        return _Result(obj=dict(zip(header, rows[0])))
    return _Result(header=header, rows=rows)


def _run_simulate(o):
    interval = o["interval_hours"] if o["interval_hours"] is not None else 1.0 / o["mu"]
    if not interval > 0:
        raise DomainError("access rate must be > 0")
    k = o["k"]
    if o["posts"]:
        posts = _load_posts(o["posts"], o["input_format"])
        meta = trace_meta(posts)
        cfg = SimConfig(
            k=k,
            sample_interval_hours=interval,
            period_hours=o["period_hours"] or meta.time_span_hours,
            rounds=o["rounds"],
            seed=o["seed"],
            access_schedule=_schedule(o, AccessSchedule.RANDOM_REFERENCE),
        )
        pt = simulate_trace_fifo(posts, cfg)
        lam = o["lam"] if o["lam"] is not None else meta.estimated_lambda
        mode, schedule = "trace", cfg.access_schedule
    else:
        lam = o["lam"]
        schedule = _schedule(o, AccessSchedule.EXPONENTIAL_CLOCK)
        accesses = o["accesses"]
        if accesses is None:
            accesses = math.floor((o["period_hours"] or DEFAULT_PERIOD_HOURS) / interval)
        params = ModelParams(lam=lam, mu=1.0 / interval, k=k)
        pt = simulate_synthetic(params, accesses, o["rounds"], o["seed"], schedule)
        mode = "synthetic"
    if schedule is AccessSchedule.DETERMINISTIC_CLOCK:
        model = voa_deterministic(lam, interval, k)
    else:
        model = voa_exponential(ModelParams(lam=lam, mu=1.0 / interval, k=k)).mean
    return _Result(
        obj={
            "mode": mode,
            "schedule": schedule.value,
            "lambda": lam,
            "inverse_mu": interval,
            "k": k,
            "mean": pt.mean_voa,
            "std": pt.std_voa,
            "stderr": pt.stderr,
            "rounds": pt.rounds,
            "model_voa": model,
        }
    )


def _prepared_snapshots(o):
    snaps = _load_snapshots(o["impressions"], o["input_format"])
    if o["fifo_reorder"]:
        snaps = [reorder_fifo(s) for s in snaps]
    return snaps


def _truncations(o):
    ks = o["truncate_k"]
    if ks is None:
        return [None]
    out = []
    for k in ks:
        if not float(k).is_integer():
            raise DomainError(f"--truncate-k must be an integer, got {k}")
        out.append(int(k))
    return out


def _run_snapshot_voa(o):
    per_user = snapshots_by_user(_prepared_snapshots(o))
    rows = []
    for user in sorted(per_user):
        for k in _truncations(o):
            counts, mean = voa_from_snapshots(per_user[user], k)
            rows.append([user, "" if k is None else k, len(counts), sum(counts), mean])
    return _Result(header=["user", "truncate_k", "snapshots", "total_voa", "mean_voa"], rows=rows)


def _viewed_sets(o, k):
    per_user = snapshots_by_user(_prepared_snapshots(o))
    return {u: {pid for s in snaps for pid in s.post_ids(k)} for u, snaps in sorted(per_user.items())}


def _run_overlap(o):
    ks = _truncations(o)
    if len(ks) > 1:
        raise DomainError("overlap takes a single --truncate-k")
    viewed = _viewed_sets(o, ks[0])
    universe = set().union(*viewed.values()) if viewed else set()
    rows = []
    for x, y in combinations(sorted(viewed), 2):
        t = overlap_table(viewed[x], viewed[y], universe)
        cov_xy = coverage_fraction(t) if t.both + t.only_y else ""
        cov_yx = coverage_fraction(t.transposed()) if t.both + t.only_x else ""
        pw = pairwise_overlap_from_table(t) if t.both + t.only_x + t.only_y else ""
        rows.append([x, y, t.both, t.only_x, t.only_y, t.neither, t.universe_size, cov_xy, cov_yx, pw])
    header = ["x", "y", "both", "only_x", "only_y", "neither", "universe_size",
              "coverage_x_over_y", "coverage_y_over_x", "pairwise_overlap"]
    return _Result(header=header, rows=rows)


def _run_ecdf(o):
    ks = _truncations(o)
    if len(ks) > 1:
        raise DomainError("ecdf takes a single --truncate-k")
    viewed = _viewed_sets(o, ks[0])
    ecdf = viewer_ecdf(list(viewed.values()))
    return _Result(header=["viewer_count", "cumulative_fraction"], rows=[list(p) for p in ecdf.points])


def _run_trace_info(o):
    meta = trace_meta(_load_posts(o["posts"], o["input_format"]))
    if o.get("format") == "csv":
        return _Result(header=["date", "posts"], rows=[[d, n] for d, n in meta.daily_counts.items()])
    return _Result(
        obj={
            "post_count": meta.post_count,
            "publisher_count": meta.publisher_count,
            "time_span_hours": meta.time_span_hours,
            "estimated_lambda": meta.estimated_lambda,
            "daily_counts": meta.daily_counts,
        }
    )


def _dispatch(cmd: Command) -> _Result:
    o = cmd.options
    sc = cmd.subcommand
    if sc is Subcommand.EVAL:
        return _run_eval(o)
    if sc is Subcommand.SWEEP:
        return _run_sim_sweep(o) if o["inverse_mu"] is not None else _run_model_sweep(o)
    if sc is Subcommand.OPTIMIZE:
        return _run_optimize(o)
    if sc is Subcommand.SIMULATE:
        return _run_simulate(o)
    if sc is Subcommand.SNAPSHOT_VOA:
        return _run_snapshot_voa(o)
    if sc is Subcommand.OVERLAP:
        return _run_overlap(o)
    if sc is Subcommand.ECDF:
        return _run_ecdf(o)
    return _run_trace_info(o)


def execute(cmd: Command, stdout=None, stderr=None) -> int:
    """Run a parsed command; returns the exit status.

    Any failure is reported as one ``voa: error: ...`` line on ``stderr``.
    """
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        text = _dispatch(cmd).render(cmd.options.get("format"))
        if cmd.out:
            with open(cmd.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except TraceFormatError as exc:
        return _fail(stderr, exc, EXIT_PARSE)
    except ConvergenceError as exc:
        return _fail(stderr, exc, EXIT_CONVERGENCE)
    except (DomainError, ValueError) as exc:
        return _fail(stderr, exc, EXIT_DOMAIN)
    except OSError as exc:
        return _fail(stderr, exc, EXIT_IO)
    return EXIT_OK


def _fail(stderr, exc, code):
    stderr.write(f"voa: error: {exc}\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    return execute(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
