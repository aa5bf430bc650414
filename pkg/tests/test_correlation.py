import numpy as np
import pytest
from scipy.integrate import quad

from ldma.channel import steering_vector
from ldma.correlation import (
    correlation_beta,
    dirichlet_sinc,
    focusing_correlation_approx,
    focusing_correlation_exact,
    focusing_correlation_gap,
    fresnel,
    fresnel_ratio,
    fresnel_ratio_envelope,
    solve_envelope_beta,
    steering_correlation,
)
from ldma.geometry import ArrayConfig, Location


def fresnel_quadrature(x):
    """Independent oracle: adaptive quadrature of the defining integrals."""
    c = quad(lambda t: np.cos(0.5 * np.pi * t * t), 0.0, x, limit=500)[0]
    s = quad(lambda t: np.sin(0.5 * np.pi * t * t), 0.0, x, limit=500)[0]
    return c, s


class TestFresnel:
    def test_zero(self):
        pair = fresnel(0.0)
        assert pair.C == 0.0 and pair.S == 0.0

    def test_unit_argument(self):
        pair = fresnel(1.0)
        assert pair.C == pytest.approx(0.77989, abs=1e-5)
        assert pair.S == pytest.approx(0.43826, abs=1e-5)

    def test_large_argument_limit(self):
        pair = fresnel(1e3)
        assert pair.C == pytest.approx(0.5, abs=1e-3)
        assert pair.S == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("x", [0.05, 0.4, 1.0, 1.59, 1.61, 2.7, 4.2, 6.9, 9.3])
    def test_against_quadrature(self, x):
        c_ref, s_ref = fresnel_quadrature(x)
        pair = fresnel(x)
        assert abs(pair.C - c_ref) < 1e-8
        assert abs(pair.S - s_ref) < 1e-8

    def test_odd_symmetry(self):
        xs = np.array([0.3, 1.2, 2.5, 7.0])
        plus = fresnel(xs)
        minus = fresnel(-xs)
        assert np.allclose(minus.C, -plus.C, atol=1e-15)
        assert np.allclose(minus.S, -plus.S, atol=1e-15)

    def test_bounded(self):
        xs = np.linspace(0, 50, 5000)
        pair = fresnel(xs)
        assert np.max(np.abs(pair.C)) <= 0.9
        assert np.max(np.abs(pair.S)) <= 0.9

    def test_vector_matches_scalar(self):
        xs = np.array([0.2, 1.8, 5.0])
        pair = fresnel(xs)
        for i, x in enumerate(xs):
            single = fresnel(float(x))
            assert pair.C[i] == single.C and pair.S[i] == single.S


class TestFresnelRatio:
    def test_limit_at_zero(self):
        assert fresnel_ratio(0.0) == 1.0

    def test_asymptotic_decay(self):
        # |C + jS| -> sqrt(1/2), so the ratio approaches (1/sqrt(2)) / beta.
        for beta in [10.0, 20.0, 50.0, 100.0]:
            assert fresnel_ratio(beta) == pytest.approx(np.sqrt(0.5) / beta, rel=0.05)

    def test_envelope_majorizes_and_decreases(self):
        grid = np.linspace(0.0, 60.0, 120_001)
        env = fresnel_ratio_envelope(grid)
        assert np.all(env >= fresnel_ratio(grid) - 1e-12)
        assert np.all(np.diff(env) <= 1e-12)
        assert env[0] == 1.0

    def test_envelope_solver_round_trip(self):
        for target in (0.9, 0.6, 0.35, 0.12):
            beta = solve_envelope_beta(target)
            assert fresnel_ratio_envelope(beta) == pytest.approx(target, abs=1e-6)

    def test_envelope_solver_rejects_bad_targets(self):
        for target in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                solve_envelope_beta(target)


class TestDirichletSinc:
    def test_at_zero(self):
        assert dirichlet_sinc(9, 0.0) == 1.0

    def test_removable_singularities(self):
        for m in (2.0, -2.0, 4.0, 40.0):
            assert dirichlet_sinc(9, m) == 1.0

    def test_first_null(self):
        assert abs(dirichlet_sinc(8, 0.25)) < 1e-15

    def test_brute_force_equivalence(self):
        # (1/N) |sum_n exp(j n pi a)| over centered indices.
        rng = np.random.default_rng(5)
        for _ in range(200):
            n_ant = int(rng.integers(0, 200)) * 2 + 1
            alpha = float(rng.uniform(-4.0, 4.0))
            idx = np.arange(-(n_ant - 1) // 2, (n_ant - 1) // 2 + 1)
            brute = np.abs(np.exp(1j * idx * np.pi * alpha).sum()) / n_ant
            assert abs(abs(dirichlet_sinc(n_ant, alpha)) - brute) < 1e-12

    def test_specific_value_n64(self):
        n_ant, alpha = 64, 0.013
        # Even counts have no centered integer grid; compare to the
        # half-integer-offset closed form directly.
        val = dirichlet_sinc(n_ant, alpha)
        expected = np.sin(n_ant * np.pi * alpha / 2) / (n_ant * np.sin(np.pi * alpha / 2))
        assert val == pytest.approx(expected, abs=1e-12)

    def test_rejects_bad_count(self):
        with pytest.raises(ValueError):
            dirichlet_sinc(0, 0.1)


class TestSteeringCorrelation:
    def test_self_correlation(self, cfg257):
        assert steering_correlation(cfg257, 0.37, 0.37) == 1.0

    def test_dft_null(self, cfg257):
        # sin-offset of 2/N lands on the first DFT null for d = lambda/2.
        phi_l = 0.0
        phi_m = np.arcsin(2.0 / 257)
        assert steering_correlation(cfg257, phi_l, phi_m) < 1e-12

    def test_matches_inner_product(self, rng):
        for _ in range(100):
            n_ant = int(rng.integers(3, 300)) * 2 + 1
            cfg = ArrayConfig.half_wavelength(n_ant, 30e9)
            phi_l, phi_m = rng.uniform(-1.4, 1.4, 2)
            direct = abs(np.vdot(steering_vector(cfg, phi_l), steering_vector(cfg, phi_m)))
            assert abs(steering_correlation(cfg, phi_l, phi_m) - direct) < 1e-12

    def test_angular_orthogonality_trend(self):
        phi_l, phi_m = 0.1, 0.1 + 0.013
        values = [
            steering_correlation(ArrayConfig.half_wavelength(n, 30e9), phi_l, phi_m)
            for n in (65, 257, 1025)
        ]
        assert values[0] > values[1] > values[2]

    def test_symmetry(self, cfg257, rng):
        for _ in range(20):
            a, b = rng.uniform(-1.4, 1.4, 2)
            assert steering_correlation(cfg257, a, b) == pytest.approx(
                steering_correlation(cfg257, b, a), abs=1e-15
            )


class TestFocusingCorrelation:
    def test_self_correlation(self, cfg257):
        loc = Location(7.0, 0.3)
        assert focusing_correlation_exact(cfg257, loc, loc) == pytest.approx(1.0, abs=1e-12)

    def test_far_field_matches_steering(self, cfg257):
        from ldma.geometry import rayleigh_distance

        r = 100.0 * rayleigh_distance(cfg257)
        phi_l, phi_m = 0.2, 0.2 + 0.01
        near = focusing_correlation_exact(cfg257, Location(r, phi_l), Location(r, phi_m))
        far = steering_correlation(cfg257, phi_l, phi_m)
        assert abs(near - far) < 1e-3

    def test_symmetry(self, cfg257):
        a, b = Location(5.0, 0.5), Location(15.0, 0.1)
        assert focusing_correlation_exact(cfg257, a, b) == pytest.approx(
            focusing_correlation_exact(cfg257, b, a), abs=1e-15
        )

    def test_antenna_scaling_envelope(self):
        # Same-angle pair: correlation envelope falls as the array grows.
        pair = (Location(5.0, np.pi / 6), Location(15.0, np.pi / 6))
        vals = {
            n: focusing_correlation_exact(ArrayConfig.half_wavelength(n, 30e9), *pair)
            for n in (257, 1025, 4097)
        }
        assert vals[257] > vals[1025] > vals[4097]
        assert vals[4097] < 0.1


class TestClosedFormCorrelation:
    def test_beta_value(self):
        # N = 256 grid of the published setup, evaluated at the nearest odd
        # count 257 scales by 257/256.
        cfg = ArrayConfig(257, 0.005, 29_979_245_800.0)  # lambda exactly 1 cm
        beta = correlation_beta(cfg, 5.0, 15.0, np.pi / 6)
        assert beta == pytest.approx(2.862167, rel=1e-5 * 257 / 256 + 5e-3)
        assert beta * 256 / 257 == pytest.approx(2.8622, abs=2e-4)

    def test_equal_distances(self, cfg257):
        report = focusing_correlation_approx(cfg257, 5.0, 5.0, 0.4)
        assert report.approx_beta == 0.0
        assert report.approx_value == 1.0
        assert report.exact == pytest.approx(1.0, abs=1e-12)

    def test_lemma_accuracy(self, cfg257):
        report = focusing_correlation_approx(cfg257, 5.0, 15.0, np.pi / 6)
        assert report.abs_error <= 0.05

    def test_symmetry_in_distances(self, cfg257):
        a = focusing_correlation_approx(cfg257, 5.0, 15.0, 0.3)
        b = focusing_correlation_approx(cfg257, 15.0, 5.0, 0.3)
        assert a.approx_beta == b.approx_beta
        assert a.exact == pytest.approx(b.exact, abs=1e-15)

    def test_gap_form_matches_vectors(self, cfg257):
        # The quadratic-model inner product depends only on the 1/r gap.
        from ldma.channel import focusing_vector

        l1, l2 = Location(6.0, 0.25), Location(31.0, 0.25)
        direct = np.vdot(
            focusing_vector(cfg257, l1, "second_order"),
            focusing_vector(cfg257, l2, "second_order"),
        )
        gap = 1.0 / l1.distance - 1.0 / l2.distance
        closed = focusing_correlation_gap(cfg257, 0.25, gap)
        assert abs(direct - closed) < 1e-12


class TestDistanceDomainOrthogonality:
    def test_fresnel_numerator_converges(self):
        pair = fresnel(200.0)
        assert abs(complex(pair.C, pair.S) - (0.5 + 0.5j)) < 2e-3

    def test_correlation_vanishes_with_antennas(self):
        locs = (Location(5.0, np.pi / 6), Location(15.0, np.pi / 6))
        small = focusing_correlation_exact(ArrayConfig.half_wavelength(257, 30e9), *locs)
        big = focusing_correlation_exact(ArrayConfig.half_wavelength(4097, 30e9), *locs)
        assert big < 0.1
        assert big < small / 2

    def test_two_dimensional_orthogonality(self):
        # Median correlation over a grid of pairs differing in angle or
        # distance shrinks with N and is small at the largest array.
        pairs = []
        for r_l, r_m in [(5.0, 9.0), (7.0, 30.0), (12.0, 80.0)]:
            for dphi in (0.0, 0.05, -0.2):
                pairs.append((Location(r_l, 0.3), Location(r_m, 0.3 + dphi)))
        for phi_l, phi_m in [(0.1, 0.15), (-0.4, 0.1), (0.6, 0.61)]:
            pairs.append((Location(20.0, phi_l), Location(20.0, phi_m)))
        medians = []
        for n in (257, 1025, 4097):
            cfg = ArrayConfig.half_wavelength(n, 30e9)
            medians.append(
                np.median([focusing_correlation_exact(cfg, a, b) for a, b in pairs])
            )
        assert medians[0] > medians[1] > medians[2]
        assert medians[2] < 0.15
