import numpy as np
import pytest

from shiftlab.divergences import (
    DivergenceEstimate,
    gauss_hellinger,
    gauss_tv,
    mc_all_divergences,
    mc_divergence,
    mc_m_delta,
    write_estimates_csv,
)
from shiftlab.errors import DimensionMismatch
from shiftlab.fourier import FourierCurve
from shiftlab.measures import Discrete


def random_curve(rng, cutoff, scale=1.0):
    dim = 2 * cutoff + 1
    return FourierCurve(scale * (rng.normal(size=dim) + 1j * rng.normal(size=dim)))


def random_measure(rng, max_atoms=4):
    n = int(rng.integers(1, max_atoms + 1))
    return Discrete(rng.random(n), rng.dirichlet(np.ones(n)))


class TestGaussClosedForms:
    def test_tv_zero_at_equality(self, rng):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert gauss_tv(z, z) == 0.0

    def test_tv_separation_sqrt_two(self):
        # the quadrature value 2 Phi(1) - 1 is attained at separation sqrt(2)
        got = gauss_tv(np.zeros(1, complex), np.array([np.sqrt(2) + 0j]))
        assert got == pytest.approx(0.6826894921370859, abs=1e-12)

    def test_tv_separation_two_quadrature_value(self):
        got = gauss_tv(np.zeros(1, complex), np.array([2.0 + 0j]))
        assert got == pytest.approx(0.8427007929497149, abs=1e-12)

    def test_tv_monotone_to_one(self):
        vals = [gauss_tv(np.zeros(1, complex), np.array([d + 0j])) for d in np.linspace(0, 12, 30)]
        assert np.all(np.diff(vals) >= 0)
        assert vals[-1] == pytest.approx(1.0, abs=1e-8)

    def test_tv_linear_upper_bound(self):
        from math import erf

        for x in np.linspace(0.0, 10.0, 101):
            # printed-formula inequality, checked verbatim as formulas
            assert erf(x / 2 / np.sqrt(2)) <= x / np.sqrt(2 * np.pi) + 1e-15
            # the implemented TV obeys the matching exact bound x / sqrt(pi)
            tv = gauss_tv(np.zeros(1, complex), np.array([x + 0j]))
            assert tv <= x / np.sqrt(np.pi) + 1e-15

    def test_hellinger_zero_and_unit(self):
        z = np.zeros(2, complex)
        assert gauss_hellinger(z, z) == 0.0
        d = np.sqrt(4 * np.log(2))
        got = gauss_hellinger(np.zeros(1, complex), np.array([d + 0j]))
        assert got == pytest.approx(1.0, rel=1e-12)

    def test_distance_chain_closed_forms(self, rng):
        for _ in range(100):
            dim = int(rng.integers(1, 5))
            z1 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            z2 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            h = gauss_hellinger(z1, z2)
            tv = gauss_tv(z1, z2)
            assert 0.5 * h**2 <= tv + 1e-12
            assert tv <= h + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gauss_tv(np.zeros(2, complex), np.zeros(3, complex))


class TestMcDivergence:
    def test_identical_models_near_zero(self, rng):
        theta = random_curve(rng, 1)
        g = random_measure(rng)
        out = mc_all_divergences((theta, g), (theta, g), 5000, rng)
        for kind, est in out.items():
            assert abs(est.value) <= max(3 * est.std_error, 1e-9), kind

    def test_kl_point_masses_analytic(self, rng):
        # KL(gamma_z1 || gamma_z2) = ||z1 - z2||^2 for unit complex Gaussians
        f1, f2 = random_curve(rng, 1), random_curve(rng, 1)
        d0 = Discrete.point_mass(0.0)
        est = mc_divergence("kl", (f1, d0), (f2, d0), 100_000, rng)
        expected = float(np.sum(np.abs(f1.coeffs - f2.coeffs) ** 2))
        assert abs(est.value - expected) <= 3 * est.std_error

    def test_v_point_masses_analytic(self, rng):
        # log ratio ~ N(||d||^2, 2 ||d||^2) under p, so V = 2||d||^2 + ||d||^4
        f1, f2 = random_curve(rng, 1, 0.7), random_curve(rng, 1, 0.7)
        d0 = Discrete.point_mass(0.0)
        est = mc_divergence("v", (f1, d0), (f2, d0), 200_000, rng)
        dsq = float(np.sum(np.abs(f1.coeffs - f2.coeffs) ** 2))
        assert abs(est.value - (2 * dsq + dsq**2)) <= 3 * est.std_error

    def test_hellinger_matches_closed_form(self, rng):
        f1, f2 = random_curve(rng, 1, 0.8), random_curve(rng, 1, 0.8)
        d0 = Discrete.point_mass(0.0)
        est = mc_divergence("hellinger", (f1, d0), (f2, d0), 200_000, rng)
        expected = gauss_hellinger(f1.coeffs, f2.coeffs)
        assert abs(est.value - expected) <= 3 * max(est.std_error, 1e-6)

    def test_tv_matches_closed_form(self, rng):
        f1, f2 = random_curve(rng, 1, 0.8), random_curve(rng, 1, 0.8)
        d0 = Discrete.point_mass(0.0)
        est = mc_divergence("tv", (f1, d0), (f2, d0), 200_000, rng)
        expected = gauss_tv(f1.coeffs, f2.coeffs)
        assert abs(est.value - expected) <= 3 * max(est.std_error, 1e-6)

    def test_needs_min_samples(self, rng):
        theta = random_curve(rng, 0)
        g = Discrete.point_mass(0.0)
        with pytest.raises(ValueError):
            mc_divergence("kl", (theta, g), (theta, g), 100, rng)

    def test_cutoff_padding_changes_nothing(self, rng):
        # padding both models with inert noise coordinates is a no-op
        f1, f2 = random_curve(rng, 1), random_curve(rng, 1)
        g = random_measure(rng)
        a = mc_divergence("kl", (f1, g), (f2, g), 20_000, np.random.default_rng(7))
        b = mc_divergence(
            "kl", (f1.pad_to(3), g), (f2.pad_to(3), g), 20_000, np.random.default_rng(7)
        )
        assert abs(a.value - b.value) <= 3 * np.hypot(a.std_error, b.std_error)

    def test_se_shrinks_with_n(self, rng):
        f1, f2 = random_curve(rng, 1), random_curve(rng, 1)
        g = random_measure(rng)
        small = mc_divergence("kl", (f1, g), (f2, g), 2000, rng)
        big = mc_divergence("kl", (f1, g), (f2, g), 64_000, rng)
        assert big.std_error < small.std_error

    def test_clipping_reported_only(self):
        est = DivergenceEstimate("tv", 1.07, 0.05, 1000)
        assert est.value == 1.07
        assert est.clipped_value() == 1.0


class TestMDelta:
    def test_same_model_exactly_zero(self, rng):
        f0 = random_curve(rng, 1)
        g0 = random_measure(rng)
        est = mc_m_delta(f0, g0, f0, g0, 0.5, 2000, rng)
        assert est.value == 0.0 and est.std_error == 0.0

    def test_positive_when_models_far(self, rng):
        f0 = random_curve(rng, 1, 1.0)
        far = FourierCurve(f0.coeffs + 4.0)
        g = Discrete.point_mass(0.0)
        est = mc_m_delta(f0, g, far, g, 0.25, 50_000, rng)
        assert est.value > 0 and np.isfinite(est.value)
        assert est.delta == 0.25

    def test_delta_range_validated(self, rng):
        f0 = random_curve(rng, 0)
        g = Discrete.point_mass(0.0)
        with pytest.raises(ValueError):
            mc_m_delta(f0, g, f0, g, 1.5, 2000, rng)


class TestEstimatesCsv:
    def test_schema(self, tmp_path, rng):
        ests = [
            DivergenceEstimate("hellinger", 0.4, 0.01, 1000),
            DivergenceEstimate("mdelta", 1.2, 0.2, 1000, delta=0.25),
        ]
        path = tmp_path / "est.csv"
        write_estimates_csv(ests, path, seed=5)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "kind,value,std_error,samples,seed"
        assert lines[1].startswith("hellinger,0.4,0.01,1000,5")
        assert lines[2].startswith("mdelta(0.25)")
