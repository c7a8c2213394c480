import numpy as np
import pytest

from shiftlab.errors import ParseError
from shiftlab.fourier import (
    H1,
    Hs,
    L2,
    FourierCurve,
    evaluate,
    norm,
    project,
    read_curve_csv,
    shift_action,
    write_curve_csv,
)


def random_curve(rng, cutoff, scale=1.0):
    dim = 2 * cutoff + 1
    return FourierCurve(scale * (rng.normal(size=dim) + 1j * rng.normal(size=dim)))


class TestShiftAction:
    def test_frequency_zero_invariant(self):
        c = FourierCurve.from_dict({0: 3.0})
        assert shift_action(c, 0.7) == c

    def test_zero_shift_identity(self, rng):
        c = random_curve(rng, 3)
        assert shift_action(c, 0.0) == c

    def test_quarter_turn(self):
        c = FourierCurve.from_dict({1: 1.0})
        out = shift_action(c, 0.25).coeff(1)
        assert out == pytest.approx(-1j, abs=1e-15)

    def test_isometry_all_norms(self, rng):
        for _ in range(20):
            c = random_curve(rng, int(rng.integers(1, 6)))
            phi = rng.random()
            for kind in (L2, H1, Hs(1.0), Hs(2.5)):
                assert norm(shift_action(c, phi), kind) == pytest.approx(
                    norm(c, kind), rel=1e-12
                )

    def test_group_action_composition(self, rng):
        for _ in range(20):
            c = random_curve(rng, 4)
            p1, p2 = rng.random(2)
            a = shift_action(shift_action(c, p1), p2)
            b = shift_action(c, (p1 + p2) % 1.0)
            np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-12)


class TestNorm:
    def test_l2_h1_two_atoms(self):
        c = FourierCurve.from_dict({-1: 1.0, 1: 1.0})
        assert norm(c, L2) == pytest.approx(np.sqrt(2))
        assert norm(c, H1) == pytest.approx(np.sqrt(2))

    def test_h1_ignores_frequency_zero(self):
        assert norm(FourierCurve.from_dict({0: 3.0}), H1) == 0.0

    def test_hs_weight(self):
        assert norm(FourierCurve.from_dict({2: 1.0}), Hs(2)) == pytest.approx(
            np.sqrt(17)
        )

    def test_hs_rejects_sub_one(self):
        with pytest.raises(ValueError):
            Hs(0.5)

    def test_hs1_matches_h1_on_weighted_part(self, rng):
        c = random_curve(rng, 3)
        # Hs(1)^2 = L2^2 + H1^2: the weights are 1 + k^2
        assert norm(c, Hs(1)) ** 2 == pytest.approx(
            norm(c, L2) ** 2 + norm(c, H1) ** 2, rel=1e-12
        )


class TestProject:
    def test_basic_split(self):
        proj, tail = project(FourierCurve.from_dict({0: 1.0, 2: 1.0}), 1)
        assert proj == FourierCurve.from_dict({0: 1.0})
        assert tail == pytest.approx(1.0)

    def test_identity_beyond_cutoff(self, rng):
        c = random_curve(rng, 2)
        proj, tail = project(c, 5)
        assert proj == c and tail == 0.0

    def test_hand_example_tail_bound(self):
        c = FourierCurve.from_dict({1: 1.0, 3: 0.5})
        _, tail = project(c, 2)
        assert tail == pytest.approx(0.5)
        assert tail <= norm(c, H1) / 2  # H1 = sqrt(1 + 9/4)
        assert norm(c, H1) == pytest.approx(np.sqrt(3.25))

    def test_tail_bound_property(self, rng):
        # |theta_l| ~ |l|^{-(s+1)} decay: tail <= ||theta||_{Hs} * l^{-s}
        for s in (1.0, 1.5, 2.0):
            ks = np.arange(-16, 17)
            safe = np.where(ks == 0, 1, np.abs(ks)).astype(float)
            amps = np.where(ks == 0, 1.0, safe ** -(s + 1))
            phases = np.exp(2j * np.pi * rng.random(ks.size))
            c = FourierCurve(amps * phases)
            for ell in (1, 2, 4, 8):
                _, tail = project(c, ell)
                assert tail <= norm(c, Hs(s)) * ell ** (-s) + 1e-12


class TestEvaluate:
    def test_constant(self, rng):
        val = 2.0 - 1.5j
        c = FourierCurve.from_dict({0: val})
        assert evaluate(c, rng.random()) == pytest.approx(val)

    def test_unit_frequency_at_zero(self):
        assert evaluate(FourierCurve.from_dict({1: 1.0}), 0.0) == pytest.approx(1.0)

    def test_periodicity(self, rng):
        c = random_curve(rng, 3)
        t = rng.random()
        assert evaluate(c, t) == pytest.approx(evaluate(c, t + 1.0), rel=1e-10)

    def test_shift_evaluation_identity(self, rng):
        c = random_curve(rng, 4)
        for _ in range(100):
            t, phi = rng.random(2)
            lhs = evaluate(shift_action(c, phi), t)
            rhs = evaluate(c, t - phi)
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_parseval_on_grid(self, rng):
        c = random_curve(rng, 64, scale=0.3)
        t = np.arange(4096) / 4096
        vals = evaluate(c, t)
        grid_energy = float(np.mean(np.abs(vals) ** 2))
        assert grid_energy == pytest.approx(norm(c, L2) ** 2, rel=1e-6)


class TestCurveCsv:
    def test_round_trip(self, tmp_path, rng):
        c = random_curve(rng, 5)
        path = tmp_path / "curve.csv"
        write_curve_csv(c, path)
        assert read_curve_csv(path) == c

    def test_sparse_rows_mean_zero(self, tmp_path):
        path = tmp_path / "curve.csv"
        path.write_text("freq,re,im\n-2,1.0,0.0\n3,0.0,0.5\n")
        c = read_curve_csv(path)
        assert c.cutoff == 3
        assert c.coeff(0) == 0j and c.coeff(-2) == 1.0

    def test_rejects_unsorted(self, tmp_path):
        path = tmp_path / "curve.csv"
        path.write_text("freq,re,im\n2,1.0,0.0\n1,0.0,0.5\n")
        with pytest.raises(ParseError):
            read_curve_csv(path)

    def test_rejects_bad_row(self, tmp_path):
        path = tmp_path / "curve.csv"
        path.write_text("freq,re,im\n1,oops,0.0\n")
        with pytest.raises(ParseError, match="line 2"):
            read_curve_csv(path)


class TestCurveType:
    def test_cutoff_inference(self):
        c = FourierCurve.from_dict({-3: 1.0})
        assert c.cutoff == 3 and c.dim == 7

    def test_rejects_even_length(self):
        with pytest.raises(ValueError):
            FourierCurve(np.zeros(4))

    def test_pad_keeps_values(self, rng):
        c = random_curve(rng, 2)
        padded = c.pad_to(4)
        assert padded.cutoff == 4
        for k in range(-2, 3):
            assert padded.coeff(k) == c.coeff(k)
        assert padded.coeff(4) == 0j
