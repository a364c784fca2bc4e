import numpy as np
import pytest

from voa.errors import ConvergenceError, DomainError
from voa.model import ModelParams, voa_exponential
from voa.optimizer import (
    golden_section_max,
    optimal_access_rate,
    optimal_access_rate_numeric,
    utility,
    utility_gradient,
)

LAM = 4.487


def random_grid(n, seed):
    """(lam, k, c) triples with k > c."""
    rng = np.random.default_rng(seed)
    for _ in range(n):
        lam = float(rng.uniform(0.1, 20))
        k = int(rng.integers(2, 51))
        c = float(rng.uniform(0.05, 0.9 * k))
        yield lam, k, c


class TestUtility:
    def test_zero_rate(self):
        assert utility(ModelParams(LAM, 0.0, 10, cost=1)) == 0.0

    def test_matches_rate_times_voa(self):
        v = voa_exponential(ModelParams(LAM, 1, 10)).mean
        assert utility(ModelParams(LAM, 1, 10, cost=1)) == pytest.approx(v - 1, rel=1e-14)
        assert utility(ModelParams(LAM, 1, 10, cost=1)) == pytest.approx(2.8869780156, abs=1e-9)
        assert utility(ModelParams(LAM, 1, 10, cost=0)) == pytest.approx(v, rel=1e-14)


class TestGradient:
    def test_at_zero(self):
        assert utility_gradient(ModelParams(LAM, 0.0, 10, cost=1)) == 9.0

    def test_at_one(self):
        # 10 * (4.487/5.487)**11 - 1, from 40-digit mpmath
        assert utility_gradient(ModelParams(LAM, 1, 10, cost=1)) == pytest.approx(0.0935337786781487, rel=1e-12)

    def test_finite_differences(self):
        h = 1e-6
        for lam, k, c in random_grid(200, seed=1):
            mu = float(np.random.default_rng(int(lam * 1e6)).uniform(0.01, 5 * lam))
            fd = (utility(ModelParams(lam, mu + h, k, c)) - utility(ModelParams(lam, mu - h, k, c))) / (2 * h)
            g = utility_gradient(ModelParams(lam, mu, k, c))
            assert g == pytest.approx(fd, rel=1e-5, abs=1e-6)


class TestClosedForm:
    @pytest.mark.parametrize("k,expected", [(2, 1.1663), (20, 0.688)])
    def test_reported_values(self, k, expected):
        res = optimal_access_rate(LAM, k, 1)
        assert res.mu_star == pytest.approx(expected, abs=5e-4)
        assert not res.clamped

    def test_clamped_when_k_not_above_cost(self):
        res = optimal_access_rate(LAM, 1, 1)
        assert res.mu_star == 0.0 and res.clamped
        assert optimal_access_rate(LAM, 3, 5).clamped

    @pytest.mark.parametrize("args", [(0, 2, 1), (-1, 2, 1), (LAM, 2, 0), (LAM, 0, 1), (LAM, 2.5, 1)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            optimal_access_rate(*args)

    def test_stationary(self):
        for lam, k, c in random_grid(100, seed=2):
            res = optimal_access_rate(lam, k, c)
            assert abs(utility_gradient(ModelParams(lam, res.mu_star, k, c))) <= 1e-9

    def test_global_on_samples(self):
        for lam, k, c in random_grid(30, seed=3):
            res = optimal_access_rate(lam, k, c)
            mus = np.linspace(0, 10 * lam, 1000)
            best = max(utility(ModelParams(lam, m, k, c)) for m in mus)
            assert res.utility_at_star >= best - 1e-12

    def test_linear_in_lambda(self):
        for lam, k, c in random_grid(50, seed=4):
            base = optimal_access_rate(lam, k, c).mu_star
            # powers of two scale without rounding
            for a in (0.5, 2.0, 8.0):
                assert optimal_access_rate(a * lam, k, c).mu_star == a * base
            assert optimal_access_rate(3.7 * lam, k, c).mu_star == pytest.approx(3.7 * base, rel=1e-14)

    def test_rises_then_falls_in_k(self):
        mus = [optimal_access_rate(LAM, k, 1).mu_star for k in range(1, 51)]
        peak = int(np.argmax(mus))
        assert 0 < peak < 49
        assert all(np.diff(mus[: peak + 1]) > 0)
        assert all(np.diff(mus[peak:]) < 0)


class TestNumeric:
    @pytest.mark.parametrize("k,expected,tol", [(2, 1.1663, 1e-4), (20, 0.688, 1e-3), (1, 0.0, 1e-6)])
    def test_examples(self, k, expected, tol):
        assert optimal_access_rate_numeric(LAM, k, 1, 20) == pytest.approx(expected, abs=tol)

    def test_matches_closed_form(self):
        for lam, k, c in random_grid(50, seed=5):
            closed = optimal_access_rate(lam, k, c).mu_star
            num = optimal_access_rate_numeric(lam, k, c, 10 * lam)
            assert num == pytest.approx(closed, rel=1e-4)

    def test_interval_too_small(self):
        with pytest.raises(ConvergenceError):
            optimal_access_rate_numeric(LAM, 2, 1, 0.5)

    def test_golden_section_parabola(self):
        x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2 + 2, 0, 1, tol=1e-10)
        assert x == pytest.approx(0.3, abs=1e-6)
        assert fx == pytest.approx(2.0, abs=1e-12)
