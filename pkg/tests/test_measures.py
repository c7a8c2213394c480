import numpy as np
import pytest

from shiftlab.errors import InfeasibleWithinTolerance, OverlappingIntervals
from shiftlab.measures import (
    Discrete,
    DPConfig,
    GridDensity,
    bin_mass,
    circle_dist,
    dp_sample,
    eta_merge,
    moment_match_discretize,
    read_measure_csv,
    sample_shifts,
    trig_moments,
    write_measure_csv,
)


def random_discrete(rng, n_atoms):
    return Discrete(rng.random(n_atoms), rng.dirichlet(np.ones(n_atoms)))


class TestDpSample:
    def test_truncation_one_is_single_atom(self, rng):
        g = dp_sample(DPConfig(truncation=1), rng)
        assert g.n_atoms == 1 and g.weights[0] == pytest.approx(1.0)

    def test_weights_sum_to_one(self, rng):
        for k in (2, 5, 50):
            g = dp_sample(DPConfig(truncation=k), rng)
            assert g.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_mean_mass_matches_base(self, rng):
        # E g(A) = alpha(A)/alpha([0,1)) = 0.5 for A = [0, 0.5) under uniform base
        cfg = DPConfig(total_mass=1.0, truncation=50)
        n = 10_000
        masses = np.empty(n)
        for i in range(n):
            g = dp_sample(cfg, rng)
            masses[i] = g.weights[g.locations < 0.5].sum()
        se = masses.std() / np.sqrt(n)
        assert abs(masses.mean() - 0.5) <= 3 * se

    def test_stick_breaking_law(self, rng):
        # Beta(1, m) sticks make sum(w^2) average 1/(1+m) (+ a 3^{-(K-1)}/2
        # truncation term): the match probability of two draws from the
        # process. Location sorting permutes weights, so this permutation-
        # invariant moment is what identifies the stick law; with m = 1 it
        # is the Beta(1,1) mean 1/2 in disguise.
        cfg = DPConfig(total_mass=1.0, truncation=50)
        n = 100_000
        sq = np.empty(n)
        for i in range(n):
            g = dp_sample(cfg, rng)
            sq[i] = float(np.sum(g.weights**2))
        se = sq.std() / np.sqrt(n)
        assert abs(sq.mean() - 0.5) <= 3 * se


class TestEtaMerge:
    def test_separated_unchanged(self):
        g = Discrete([0.1, 0.4, 0.8], [0.2, 0.3, 0.5])
        assert eta_merge(g, 0.05) == g

    def test_two_close_atoms_merge(self):
        eta = 0.02
        g = Discrete([0.10, 0.10 + eta / 2], [0.5, 0.5])
        merged = eta_merge(g, eta)
        assert merged.n_atoms == 1
        assert merged.locations[0] == pytest.approx(0.10)
        assert merged.weights[0] == pytest.approx(1.0)

    def test_random_atoms_separated_and_mass_preserved(self, rng):
        g = random_discrete(rng, 100)
        merged = eta_merge(g, 0.01)
        assert merged.weights.sum() == pytest.approx(1.0, abs=1e-12)
        locs = merged.locations
        for i in range(locs.size):
            for j in range(i + 1, locs.size):
                assert circle_dist(locs[i], locs[j]) >= 0.01 - 1e-15

    def test_idempotent(self, rng):
        g = random_discrete(rng, 50)
        once = eta_merge(g, 0.03)
        twice = eta_merge(once, 0.03)
        assert once == twice

    def test_weight_moves_at_most_eta(self, rng):
        # every removed atom lands on a kept atom within circle distance eta,
        # and the merge equals Voronoi binning of the original onto the kept set
        g = random_discrete(rng, 60)
        eta = 0.05
        merged = eta_merge(g, eta)
        kept = merged.locations
        voronoi = np.zeros(kept.size)
        for loc, w in zip(g.locations, g.weights):
            d = circle_dist(loc, kept)
            assert d.min() <= eta + 1e-15
            voronoi[int(np.argmin(d))] += w
        np.testing.assert_allclose(voronoi, merged.weights, atol=1e-12)

    def test_wraparound_merge(self):
        g = Discrete([0.001, 0.999], [0.5, 0.5])
        merged = eta_merge(g, 0.01)
        assert merged.n_atoms == 1
        assert merged.locations[0] == pytest.approx(0.001)


class TestMomentMatch:
    def test_r_zero_single_atom(self, rng):
        g = random_discrete(rng, 5)
        out = moment_match_discretize(g, 0)
        assert out.n_atoms == 1 and out.weights[0] == pytest.approx(1.0)

    def test_single_atom_fixed_point(self):
        g = Discrete([0.37], [1.0])
        out = moment_match_discretize(g, 4, tol=1e-8)
        assert out.n_atoms <= 10
        target = trig_moments(g, 4)
        got = trig_moments(out, 4)
        assert np.max(np.abs(got - target)) <= 1e-8

    def test_uniform_r2_against_direct_moments(self):
        out = moment_match_discretize(GridDensity.uniform(32), 2, tol=1e-8)
        assert out.n_atoms <= 6
        got = trig_moments(out, 2)
        assert np.max(np.abs(got[1:])) <= 1e-8

    def test_five_atom_r8(self, rng):
        g = random_discrete(rng, 5)
        out = moment_match_discretize(g, 8, tol=1e-8)
        assert out.n_atoms <= 18
        err = np.max(np.abs(trig_moments(out, 8) - trig_moments(g, 8)))
        assert err <= 1e-8

    def test_infeasible_tolerance_raises(self, rng):
        with pytest.raises(InfeasibleWithinTolerance):
            moment_match_discretize(random_discrete(rng, 20), 10, tol=1e-30)


class TestBinMass:
    def test_point_mass_at_center(self):
        g = Discrete([0.5], [1.0])
        out = bin_mass(g, [0.5], 0.1)
        np.testing.assert_allclose(out, [1.0])

    def test_uniform_grid_density(self):
        g = GridDensity.uniform(64)
        eta = 0.05
        out = bin_mass(g, [0.2, 0.5, 0.9], eta)
        np.testing.assert_allclose(out, eta, atol=1e-12)

    def test_matches_brute_force_on_discrete(self, rng):
        g = random_discrete(rng, 40)
        centers = np.array([0.05, 0.35, 0.65, 0.95])
        eta = 0.08
        out = bin_mass(g, centers, eta)
        for c, got in zip(centers, out):
            lo = (c - eta / 2) % 1.0
            brute = sum(
                w
                for loc, w in zip(g.locations, g.weights)
                if (loc - lo) % 1.0 < eta
            )
            assert got == pytest.approx(brute, abs=1e-12)

    def test_overlapping_rejected(self):
        g = GridDensity.uniform(16)
        with pytest.raises(OverlappingIntervals):
            bin_mass(g, [0.10, 0.15], 0.2)

    def test_wraparound_interval(self):
        g = Discrete([0.99, 0.01], [0.5, 0.5])
        out = bin_mass(g, [0.0], 0.1)
        np.testing.assert_allclose(out, [1.0])

    def test_masses_bounded(self, rng):
        g = random_discrete(rng, 30)
        out = bin_mass(g, [0.1, 0.4, 0.7], 0.08)
        assert np.all(out >= 0) and np.all(out <= 1) and out.sum() <= 1 + 1e-12


class TestSampling:
    def test_discrete_sampling_frequencies(self, rng):
        g = Discrete([0.2, 0.8], [0.3, 0.7])
        draws = sample_shifts(g, 20_000, rng)
        frac = np.mean(draws == 0.2)
        assert abs(frac - 0.3) <= 3 * np.sqrt(0.3 * 0.7 / 20_000)

    def test_grid_sampling_within_bins(self, rng):
        g = GridDensity([0.0, 1.0, 0.0, 0.0])
        draws = sample_shifts(g, 500, rng)
        assert np.all((draws >= 0.25) & (draws < 0.5))


class TestMeasureCsv:
    def test_discrete_round_trip(self, tmp_path, rng):
        g = random_discrete(rng, 7)
        path = tmp_path / "g.csv"
        write_measure_csv(g, path)
        back = read_measure_csv(path)
        np.testing.assert_array_equal(back.locations, g.locations)
        np.testing.assert_array_equal(back.weights, g.weights)

    def test_grid_round_trip(self, tmp_path, rng):
        g = GridDensity(rng.dirichlet(np.ones(32)))
        path = tmp_path / "g.csv"
        write_measure_csv(g, path)
        back = read_measure_csv(path)
        assert isinstance(back, GridDensity)
        np.testing.assert_array_equal(back.masses, g.masses)


class TestValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            Discrete([0.1, 0.2], [0.5, 0.6])

    def test_duplicate_locations_coalesce(self):
        g = Discrete([0.3, 0.3, 0.7], [0.25, 0.25, 0.5])
        assert g.n_atoms == 2
        assert g.weights[0] == pytest.approx(0.5)

    def test_grid_requires_normalized(self):
        with pytest.raises(ValueError):
            GridDensity([0.5, 0.6])
