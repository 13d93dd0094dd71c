import math

import numpy as np
import pytest
from numpy.polynomial import hermite_e

from roughquad import (
    CovarianceModel,
    MomentReport,
    brownian_f_diag_second_moment,
    brownian_f_offdiag_second_moment,
    brownian_g_diag_second_moment,
    f_offdiag_second_moment_2dyoung,
    hermite,
    hermite_pairing,
    hermite_pairing_quadrature,
    isserlis_second_moment_F_diag,
    isserlis_second_moment_g_diag,
    make_uniform_partition,
    sigma_sq,
)

BM = CovarianceModel.fbm(0.5)


class TestHermite:
    def test_frozen_values(self):
        assert hermite(2, 2.0) == pytest.approx(3.0)  # x^2 - 1
        assert hermite(3, 2.0) == pytest.approx(2.0)  # x^3 - 3x
        assert hermite(0, -5.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", range(7))
    def test_matches_numpy_hermite_e(self, n, rng):
        x = rng.normal(scale=2.0, size=50)
        coeffs = [0.0] * n + [1.0]
        np.testing.assert_allclose(hermite(n, x), hermite_e.hermeval(x, coeffs), rtol=1e-12)

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            hermite(7, 0.0)
        with pytest.raises(ValueError):
            hermite(-1, 0.0)


class TestHermitePairing:
    def test_frozen_value(self):
        assert hermite_pairing(3, 0.5) == pytest.approx(0.75)  # 3! * 0.5^3

    @pytest.mark.parametrize("n", range(5))
    @pytest.mark.parametrize("rho", [-0.8, -0.3, 0.0, 0.5, 1.0])
    def test_quadrature_agreement(self, n, rho):
        assert hermite_pairing_quadrature(n, rho) == pytest.approx(
            hermite_pairing(n, rho), abs=1e-8
        )

    def test_competing_normalization_rejected_by_quadrature(self):
        # the rho^n / n! variant gives 0.5 at (n=2, rho=1); the integral says 2
        got = hermite_pairing_quadrature(2, 1.0)
        assert got == pytest.approx(2.0, abs=1e-8)
        assert abs(got - 0.5) > 1.0

    def test_rho_bounds(self):
        with pytest.raises(ValueError):
            hermite_pairing(2, 1.5)
        with pytest.raises(ValueError):
            hermite_pairing_quadrature(2, -1.01)


class TestIsserlisOracles:
    def test_f_diag_single_cell_by_hand(self):
        # one cell: F = (dX^2 - sigma^2)/2, E F^2 = Var(dX^2)/4 = sigma^4/2
        P = make_uniform_partition(0.7, 1)
        model = CovarianceModel.fbm(0.65)
        s4 = sigma_sq(model, 0.0, 0.7) ** 2
        assert isserlis_second_moment_F_diag(model, P) == pytest.approx(0.5 * s4)

    def test_g_diag_single_cell_by_hand(self):
        # one cell: g = dX^3/6, E g^2 = E dX^6 / 36 = 15 sigma^6 / 36
        P = make_uniform_partition(0.7, 1)
        model = CovarianceModel.fbm(0.65)
        s6 = sigma_sq(model, 0.0, 0.7) ** 3
        assert isserlis_second_moment_g_diag(model, P) == pytest.approx(15.0 * s6 / 36.0)

    def test_brownian_closed_forms(self):
        P = make_uniform_partition(1.0, 64)
        assert isserlis_second_moment_F_diag(BM, P) == pytest.approx(7.8125e-3, rel=1e-12)
        assert brownian_f_diag_second_moment(64) == pytest.approx(7.8125e-3, rel=1e-12)
        want_g = 15.0 / (36.0 * 64 * 64)
        assert isserlis_second_moment_g_diag(BM, P) == pytest.approx(want_g, rel=1e-12)
        assert brownian_g_diag_second_moment(64) == pytest.approx(want_g, rel=1e-12)
        assert brownian_f_offdiag_second_moment(64) == pytest.approx(1.0 / 128.0)

    def test_isserlis_matches_closed_forms_across_sizes(self):
        for n in (4, 16, 100):
            P = make_uniform_partition(2.0, n)
            assert isserlis_second_moment_F_diag(BM, P) == pytest.approx(
                brownian_f_diag_second_moment(n, 2.0), rel=1e-12
            )
            assert isserlis_second_moment_g_diag(BM, P) == pytest.approx(
                brownian_g_diag_second_moment(n, 2.0), rel=1e-12
            )


class TestTwoDYoung:
    def test_brownian_richardson_identity(self):
        # left-corner sums at ratios (r, 2r) satisfy 2 v(2r) - v(r) = T^2/(2n)
        P = make_uniform_partition(1.0, 8)
        for ratio in (8, 16):
            m = f_offdiag_second_moment_2dyoung(BM, P, fine_n=8 * ratio)
            extrapolated = 2.0 * m.value - m.coarse_value
            assert extrapolated == pytest.approx(1.0 / 16.0, rel=1e-12)

    def test_brownian_known_bias(self):
        # the left-corner sum at ratio r is exactly (1 - 1/r) T^2/(2n)
        P = make_uniform_partition(1.0, 4)
        m = f_offdiag_second_moment_2dyoung(BM, P, fine_n=4 * 32)
        assert m.value == pytest.approx((1 - 1 / 32) / 8.0, rel=1e-12)
        assert m.coarse_value == pytest.approx((1 - 1 / 16) / 8.0, rel=1e-12)

    def test_convergence_flag_honest(self):
        P = make_uniform_partition(1.0, 8)
        fine = f_offdiag_second_moment_2dyoung(BM, P, fine_n=8 * 128)
        assert fine.converged
        crude = f_offdiag_second_moment_2dyoung(BM, P, fine_n=8 * 2)
        assert not crude.converged
        assert crude.rel_diff > fine.rel_diff

    def test_fine_n_validation(self):
        P = make_uniform_partition(1.0, 8)
        with pytest.raises(ValueError):
            f_offdiag_second_moment_2dyoung(BM, P, fine_n=8)  # ratio 1: no half grid
        with pytest.raises(ValueError):
            f_offdiag_second_moment_2dyoung(BM, P, fine_n=100)  # not a multiple

    def test_rough_model_value_decreases_with_h(self):
        # rougher paths accumulate more area: H = 0.35 exceeds the Brownian value
        P = make_uniform_partition(1.0, 8)
        rough = f_offdiag_second_moment_2dyoung(CovarianceModel.fbm(0.35), P, fine_n=8 * 64)
        smooth = f_offdiag_second_moment_2dyoung(CovarianceModel.fbm(0.75), P, fine_n=8 * 64)
        brownian = f_offdiag_second_moment_2dyoung(BM, P, fine_n=8 * 64)
        assert rough.value > brownian.value > smooth.value


class TestMomentReport:
    def test_verdict_three_sigma(self):
        ok = MomentReport("s", analytic=1.0, mc_mean=1.02, mc_stderr=0.01, n_samples=100)
        bad = MomentReport("s", analytic=1.0, mc_mean=1.05, mc_stderr=0.01, n_samples=100)
        assert ok.verdict
        assert not bad.verdict
