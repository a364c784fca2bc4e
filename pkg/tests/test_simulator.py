import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import make_posts
from voa.errors import DomainError
from voa.model import ModelParams, voa_deterministic, voa_exponential
from voa.simulator import (
    AccessSchedule,
    SimConfig,
    VoaCurve,
    VoaPoint,
    access_end_indices,
    build_snapshot,
    clock_access_times,
    fifo_voas,
    post_hours,
    round_rng,
    simulate_synthetic,
    simulate_trace_fifo,
    simulate_trace_round,
    sweep_inverse_mu,
    synthetic_poisson_trace,
)

LAM = 4.487


@pytest.fixture(scope="module")
def trace():
    return synthetic_poisson_trace(LAM, 336, seed=2018)


class TestBuildSnapshot:
    def test_window(self):
        posts = make_posts(5)
        assert [p.id for p in build_snapshot(posts, 3, 2)] == ["p4", "p3"]

    def test_truncated_at_start(self):
        assert [p.id for p in build_snapshot(make_posts(5), 0, 3)] == ["p1"]

    def test_larger_than_history(self):
        assert [p.id for p in build_snapshot(make_posts(5), 4, 10)] == ["p5", "p4", "p3", "p2", "p1"]

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            build_snapshot(make_posts(5), 5, 2)


class TestFifoVoas:
    def test_disjoint_windows(self):
        assert fifo_voas([1, 3], 2).tolist() == [2, 2]

    def test_overlapping_windows(self):
        assert fifo_voas([1, 2], 2).tolist() == [2, 1]
        assert np.mean(fifo_voas([1, 2], 2)) == 1.5

    def test_order_of_draws_does_not_matter(self):
        assert fifo_voas([3, 1], 2).tolist() == [2, 2]

    def test_matches_build_snapshot_sets(self):
        posts = make_posts(40)
        rng = np.random.default_rng(0)
        for _ in range(50):
            refs = np.sort(rng.choice(40, size=8, replace=False))
            k = int(rng.integers(1, 12))
            seen = set()
            want = []
            for r in refs:
                ids = {p.id for p in build_snapshot(posts, int(r), k)}
                want.append(len(ids - seen))
                seen |= ids
            assert fifo_voas(refs, k).tolist() == want

    def test_single_snapshot_is_its_size(self):
        assert fifo_voas([6], 4).tolist() == [4]
        assert fifo_voas([2], 4).tolist() == [3]

    def test_bounded_and_monotone_in_k(self):
        rng = np.random.default_rng(1)
        refs = np.sort(rng.choice(2000, size=300, replace=False))
        prev = None
        for k in range(1, 30):
            v = fifo_voas(refs, k)
            assert v.min() >= 0 and v.max() <= k
            if prev is not None:
                assert np.all(v >= prev)
            prev = v


class TestSimConfig:
    def test_snapshots_per_round(self):
        assert SimConfig(k=10, sample_interval_hours=1, period_hours=336).snapshots_per_round == 24 * 14
        assert SimConfig(k=10, sample_interval_hours=24, period_hours=336).snapshots_per_round == 14
        assert SimConfig(k=10, sample_interval_hours=5, period_hours=336).snapshots_per_round == 67

    @pytest.mark.parametrize(
        "kw",
        [dict(k=0), dict(k=2.5), dict(sample_interval_hours=0), dict(period_hours=-1), dict(rounds=0),
         dict(sample_interval_hours=10, period_hours=5)],
    )
    def test_invalid(self, kw):
        base = dict(k=10, sample_interval_hours=1, period_hours=24)
        base.update(kw)
        with pytest.raises(DomainError):
            SimConfig(**base)


class TestRoundStreams:
    def test_distinct_streams(self):
        states = {tuple(round_rng(7, r).bit_generator.state["state"].values()) for r in range(1000)}
        assert len(states) == 1000
        firsts = {round_rng(7, r).integers(0, 2**63) for r in range(1000)}
        assert len(firsts) == 1000

    def test_reproducible(self):
        assert round_rng(7, 3).random() == round_rng(7, 3).random()
        assert round_rng(-1, 0).random() == round_rng(2**64 - 1, 0).random()


class TestTraceFifo:
    def test_deterministic_rerun(self, trace):
        cfg = SimConfig(k=10, sample_interval_hours=3, period_hours=336, rounds=5, seed=9)
        assert simulate_trace_fifo(trace, cfg) == simulate_trace_fifo(trace, cfg)

    def test_seed_changes_result(self, trace):
        cfg = SimConfig(k=10, sample_interval_hours=3, period_hours=336, rounds=5, seed=9)
        assert simulate_trace_fifo(trace, cfg) != simulate_trace_fifo(trace, replace(cfg, seed=10))

    def test_single_snapshot_round(self):
        posts = make_posts(30)
        cfg = SimConfig(k=4, sample_interval_hours=10, period_hours=10, rounds=3, seed=0)
        pt = simulate_trace_fifo(posts, cfg)
        # one reference post; only p1..p3 have short windows
        assert 1 <= pt.mean_voa <= 4

    def test_without_replacement_when_possible(self, trace):
        cfg = SimConfig(k=10, sample_interval_hours=1, period_hours=336, rounds=1, seed=0)
        refs = access_end_indices(post_hours(trace), cfg, round_rng(0, 0))
        assert len(refs) == 336 and len(set(refs.tolist())) == 336
        assert np.all(np.diff(refs) >= 0)

    def test_with_replacement_when_trace_small(self):
        posts = make_posts(5)
        cfg = SimConfig(k=2, sample_interval_hours=1, period_hours=20, rounds=1, seed=0)
        refs = access_end_indices(post_hours(posts), cfg, round_rng(0, 0))
        assert len(refs) == 20

    def test_empty_trace(self):
        with pytest.raises(DomainError):
            simulate_trace_fifo([], SimConfig(k=2, sample_interval_hours=1, period_hours=5))

    def test_exponential_clock_equals_truncated_arrivals(self, trace):
        """Per-access novelty over the trace is exactly min(arrivals since last access, k)."""
        times = post_hours(trace)
        total = 0
        for k in (1, 3, 10, 25):
            cfg = SimConfig(
                k=k, sample_interval_hours=0.1, period_hours=336, rounds=1, seed=k,
                access_schedule=AccessSchedule.EXPONENTIAL_CLOCK,
            )
            at = clock_access_times(cfg, round_rng(cfg.seed, 0))
            got = simulate_trace_round(times, cfg, 0)
            prev = np.concatenate([[-np.inf], at[:-1]])
            arrivals = np.array([np.count_nonzero((times > a) & (times <= b)) for a, b in zip(prev, at)])
            assert np.array_equal(got, np.minimum(arrivals, k))
            total += len(got)
        assert total >= 10**4

    def test_exponential_clock_brute_force(self):
        posts = synthetic_poisson_trace(2.0, 48, seed=3)
        times = post_hours(posts)
        cfg = SimConfig(k=3, sample_interval_hours=0.7, period_hours=48, rounds=1, seed=1,
                        access_schedule=AccessSchedule.EXPONENTIAL_CLOCK)
        rng = round_rng(1, 0)
        at_hi = access_end_indices(times, cfg, rng)
        got = simulate_trace_round(times, cfg, 0)
        seen = set()
        for h, v in zip(at_hi, got):
            window = {posts[i].id for i in range(max(h - 2, 0), h + 1)} if h >= 0 else set()
            assert v == len(window - seen)
            seen |= window

    def test_deterministic_clock_has_no_spread(self, trace):
        cfg = SimConfig(k=10, sample_interval_hours=2, period_hours=336, rounds=4, seed=0,
                        access_schedule=AccessSchedule.DETERMINISTIC_CLOCK)
        assert simulate_trace_fifo(trace, cfg).std_voa == 0.0


class TestSynthetic:
    def test_no_arrivals(self):
        pt = simulate_synthetic(ModelParams(0.0, 1, 10), 1000, 3, seed=1)
        assert pt.mean_voa == 0.0 and pt.std_voa == 0.0

    def test_exponential_clock_matches_closed_form(self):
        pt = simulate_synthetic(ModelParams(LAM, 1, 10), 10_000, 20, seed=42)
        assert abs(pt.mean_voa - voa_exponential(ModelParams(LAM, 1, 10)).mean) <= 3 * pt.stderr

    def test_deterministic_clock_matches_pmf_form(self):
        pt = simulate_synthetic(ModelParams(1.0, 1, 2), 10_000, 20, seed=42,
                                schedule=AccessSchedule.DETERMINISTIC_CLOCK)
        assert abs(pt.mean_voa - voa_deterministic(1, 1, 2)) <= 3 * pt.stderr

    def test_rejects_reference_schedule(self):
        with pytest.raises(DomainError):
            simulate_synthetic(ModelParams(1, 1, 2), 10, 2, 0, AccessSchedule.RANDOM_REFERENCE)

    def test_rejects_real_k(self):
        with pytest.raises(DomainError):
            simulate_synthetic(ModelParams(1, 1, 2.5), 10, 2, 0)


class TestSweep:
    def test_synthetic_within_three_se(self):
        cfg = SimConfig(k=10, sample_interval_hours=1, period_hours=336, rounds=30, seed=7,
                        access_schedule=AccessSchedule.EXPONENTIAL_CLOCK)
        curve = sweep_inverse_mu(ModelParams(LAM, 1, 10), cfg, range(1, 25))
        assert len(curve.points) == 24
        for p in curve.points:
            assert abs(p.mean_voa - p.model_voa) <= 3 * p.stderr
        assert curve.points[-1].model_voa == pytest.approx(9.508, abs=1e-3)

    def test_single_point_single_round(self):
        cfg = SimConfig(k=10, sample_interval_hours=1, period_hours=50, rounds=1, seed=0,
                        access_schedule=AccessSchedule.EXPONENTIAL_CLOCK)
        curve = sweep_inverse_mu(ModelParams(LAM, 1, 10), cfg, [2.0])
        assert len(curve.points) == 1 and curve.points[0].std_voa == 0.0 and curve.points[0].rounds == 1

    def test_trace_sweep_deterministic(self, trace):
        cfg = SimConfig(k=10, sample_interval_hours=1, period_hours=336, rounds=3, seed=1)
        a = sweep_inverse_mu(trace, cfg, [1, 2, 4])
        b = sweep_inverse_mu(trace, cfg, [1, 2, 4])
        assert a == b
        assert a.meta["lambda"] == pytest.approx(LAM, rel=0.05)

    def test_deterministic_schedule_uses_pmf_model(self):
        cfg = SimConfig(k=2, sample_interval_hours=1, period_hours=100, rounds=2, seed=0,
                        access_schedule=AccessSchedule.DETERMINISTIC_CLOCK)
        curve = sweep_inverse_mu(ModelParams(1.0, 1, 2), cfg, [1.0])
        assert curve.points[0].model_voa == pytest.approx(2 - 3 * math.exp(-1), abs=1e-12)

    def test_abscissa_checks(self):
        cfg = SimConfig(k=10, sample_interval_hours=1, period_hours=50)
        with pytest.raises(DomainError):
            sweep_inverse_mu(ModelParams(LAM, 1, 10), cfg, [])
        with pytest.raises(DomainError):
            sweep_inverse_mu(ModelParams(LAM, 1, 10), cfg, [2, 1])
        with pytest.raises(DomainError):
            VoaCurve(points=[VoaPoint(1, 0, 0, 1), VoaPoint(1, 0, 0, 1)])

    def test_random_reference_anchoring_bias(self, trace):
        """Every reference snapshot contains its own (new) reference post.

        The gap in posts between sorted uniform draws is roughly geometric on
        {1, 2, ...} with mean rho, so the method tracks
        rho * (1 - (1 - 1/rho)**k) rather than the closed form, which allows
        zero arrivals between accesses.
        """
        cfg = SimConfig(k=10, sample_interval_hours=1, period_hours=336, rounds=30, seed=7)
        pt = simulate_trace_fifo(trace, cfg)
        rho = len(trace) / 336
        anchored = rho * (1 - (1 - 1 / rho) ** 10)
        assert pt.mean_voa == pytest.approx(anchored, rel=0.02)
        assert pt.mean_voa > voa_exponential(ModelParams(LAM, 1, 10)).mean * 1.04


class TestSyntheticTrace:
    def test_rate_and_order(self, trace):
        assert len(trace) / 336 == pytest.approx(LAM, rel=0.05)
        keys = [p.sort_key() for p in trace]
        assert keys == sorted(keys)
        assert len({p.id for p in trace}) == len(trace)

    def test_reproducible(self):
        assert synthetic_poisson_trace(1.0, 24, seed=5) == synthetic_poisson_trace(1.0, 24, seed=5)
