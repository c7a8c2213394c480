import numpy as np
import pytest

from shiftlab.fourier import FourierCurve
from shiftlab.measures import DPConfig
from shiftlab.priors import (
    Adaptive,
    NonAdaptive,
    PriorConfig,
    PriorDraw,
    lambda_pmf,
    parse_preset,
    preset_name,
    sample_prior,
    sieve_indicator,
    sieve_outside_bound,
    xi_variance,
)


class TestLambdaPmf:
    def test_sums_to_one(self):
        pmf = lambda_pmf(PriorConfig())
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)

    def test_strictly_decreasing(self):
        pmf = lambda_pmf(PriorConfig(c_lambda=0.2, l_max=12))
        assert np.all(np.diff(pmf) < 0)

    def test_ratio_formula(self):
        # lambda(2)/lambda(1) = exp(-4 (ln 2)^1.5) at c = 1, rho = 1.5
        pmf = lambda_pmf(PriorConfig(rho=1.5, c_lambda=1.0, l_max=8))
        expected = np.exp(-4.0 * np.log(2.0) ** 1.5)
        assert pmf[1] / pmf[0] == pytest.approx(expected, rel=1e-12)

    def test_rho_validated(self):
        with pytest.raises(ValueError):
            PriorConfig(rho=2.5)


class TestXiVariance:
    def test_nonadaptive_s1(self):
        assert xi_variance(100, NonAdaptive(1)) == pytest.approx(0.1)

    def test_nonadaptive_s3(self):
        assert xi_variance(256, NonAdaptive(3)) == pytest.approx(0.25)

    def test_adaptive_at_e4(self):
        n = int(round(np.e**4))
        got = xi_variance(n, Adaptive())
        expected = n ** (-0.25) * np.log(n) ** (-1.5)
        assert got == pytest.approx(expected, rel=1e-12)
        # close to the exact e^{-1}/8 up to integer rounding of n
        assert got == pytest.approx(np.exp(-1.0) / 8.0, rel=2e-2)

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            xi_variance(1, NonAdaptive(1))

    def test_preset_names_round_trip(self):
        assert preset_name(parse_preset("adaptive")) == "adaptive"
        assert preset_name(parse_preset("nonadaptive:2.5")) == "nonadaptive:2.5"
        with pytest.raises(ValueError):
            parse_preset("bogus")


class TestSamplePrior:
    def test_cutoff_confinement(self, rng):
        cfg = PriorConfig(c_lambda=0.2, l_max=6)
        for _ in range(50):
            draw = sample_prior(cfg, 100, rng)
            assert draw.theta.cutoff == draw.cutoff <= 6

    def test_cutoff_frequencies_match_pmf(self, rng):
        cfg = PriorConfig(c_lambda=0.3, l_max=8)
        pmf = lambda_pmf(cfg)
        n = 10_000
        ells = np.array([sample_prior(cfg, 50, rng).cutoff for _ in range(n)])
        p1 = pmf[0]
        frac = np.mean(ells == 1)
        se = np.sqrt(p1 * (1 - p1) / n)
        assert abs(frac - p1) <= 3 * se

    def test_coefficient_second_moment(self, rng):
        cfg = PriorConfig(c_lambda=0.3, l_max=8)
        xi2 = xi_variance(200, cfg.preset)
        n = 5000
        vals = np.array(
            [abs(sample_prior(cfg, 200, rng).theta.coeff(1)) ** 2 for _ in range(n)]
        )
        se = vals.std() / np.sqrt(n)
        assert abs(vals.mean() - xi2) <= 3 * se

    def test_conditional_norm_expectation(self, rng):
        # E ||theta||^2 = (2 l + 1) xi_n^2 given the drawn cutoff
        cfg = PriorConfig(c_lambda=0.3, l_max=8)
        xi2 = xi_variance(100, cfg.preset)
        draws = [sample_prior(cfg, 100, rng) for _ in range(4000)]
        by_ell = {}
        for d in draws:
            by_ell.setdefault(d.cutoff, []).append(
                float(np.sum(np.abs(d.theta.coeffs) ** 2))
            )
        for ell, vals in by_ell.items():
            if len(vals) < 200:
                continue
            vals = np.array(vals)
            se = vals.std() / np.sqrt(vals.size)
            assert abs(vals.mean() - (2 * ell + 1) * xi2) <= 3 * se


class TestSieve:
    def test_norm_boundary(self):
        theta = FourierCurve.from_dict({0: 3.0, 1: 0.0 + 0j})
        draw = PriorDraw(1, FourierCurve.from_dict({0: 3.0}).pad_to(1), None)
        assert sieve_indicator(draw, 2)  # ||theta||^2 = 9 <= 4*2+2

    def test_cutoff_violation(self, rng):
        cfg = PriorConfig(c_lambda=0.3, l_max=8)
        draw = sample_prior(cfg, 100, rng)
        assert not sieve_indicator(draw, draw.cutoff - 1)

    def test_rejection_decreases_with_k(self, rng):
        cfg = PriorConfig(c_lambda=0.5, l_max=10)
        draws = [sample_prior(cfg, 4, rng) for _ in range(20_000)]
        rates = []
        for k_n in (1, 2, 4):
            rates.append(np.mean([not sieve_indicator(d, k_n) for d in draws]))
        assert rates[0] >= rates[1] >= rates[2]

    def test_rejection_bounded_by_tail_bound(self, rng):
        # Monte-Carlo mass outside the sieve <= lambda tail + chi-square term
        for n, k_n in ((4, 1), (4, 2), (16, 2), (64, 3)):
            cfg = PriorConfig(c_lambda=0.5, l_max=10)
            draws = [sample_prior(cfg, n, rng) for _ in range(20_000)]
            rate = np.mean([not sieve_indicator(d, k_n) for d in draws])
            bound = sieve_outside_bound(cfg, n, k_n)
            se = np.sqrt(max(rate * (1 - rate), 1e-9) / len(draws))
            assert rate <= bound + 3 * se, (n, k_n, rate, bound)
