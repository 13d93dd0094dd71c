import itertools
import json

import numpy as np
import pytest

from roughquad import (
    CovarianceModel,
    ModelInvalidError,
    Rectangle,
    check_gram_psd,
    cov_eval,
    increment_gram,
    make_uniform_partition,
    rect_increment,
    sigma_sq,
    two_d_rho_variation,
)


def brute_force_rho_variation(model, rect, P, Q, rho):
    """Independent oracle: enumerate every pair of sub-partitions outright."""

    def rect_val(s, t, u, v):
        return rect_increment(model, Rectangle(s, t, u, v))

    def chains(points):
        n = len(points) - 1
        for r in range(n):
            for interior in itertools.combinations(range(1, n), r):
                yield [points[0], *[points[i] for i in interior], points[-1]]

    xs = rect.s + P.points
    ys = rect.u + Q.points
    best = 0.0
    for cx in chains(xs):
        for cy in chains(ys):
            total = 0.0
            for a, b in zip(cx[:-1], cx[1:]):
                for c, d in zip(cy[:-1], cy[1:]):
                    total += abs(rect_val(a, b, c, d)) ** rho
            best = max(best, total)
    return best ** (1.0 / rho)


class TestModelValidation:
    def test_fbm_bounds(self):
        CovarianceModel.fbm(0.5)
        with pytest.raises(ModelInvalidError):
            CovarianceModel.fbm(0.0)
        with pytest.raises(ModelInvalidError):
            CovarianceModel.fbm(1.0)

    def test_low_hurst_needs_override(self):
        with pytest.raises(ModelInvalidError):
            CovarianceModel.fbm(0.2)
        m = CovarianceModel.fbm(0.2, allow_low_hurst=True)
        assert m.params == (0.2,)

    def test_bifractional_product_range(self):
        CovarianceModel.bifractional(0.6, 0.7)  # HK = 0.42
        with pytest.raises(ModelInvalidError):
            CovarianceModel.bifractional(0.3, 0.5)  # HK = 0.15 too rough
        with pytest.raises(ModelInvalidError):
            CovarianceModel.bifractional(0.5, 1.5)  # K > 1

    def test_fbm_sum_component_bounds(self):
        CovarianceModel.fbm_sum(0.4, 0.8)
        with pytest.raises(ModelInvalidError):
            CovarianceModel.fbm_sum(0.2, 0.8)

    def test_json_round_trip(self):
        for m in (
            CovarianceModel.fbm(0.35),
            CovarianceModel.bifractional(0.6, 0.7),
            CovarianceModel.fbm_sum(0.4, 0.8),
        ):
            back = CovarianceModel.from_json(m.to_json())
            assert back == m

    def test_from_dict_errors(self):
        with pytest.raises(ModelInvalidError):
            CovarianceModel.from_dict({"kind": "ou", "theta": 1.0})
        with pytest.raises(ModelInvalidError):
            CovarianceModel.from_dict({"kind": "fbm"})
        with pytest.raises(ModelInvalidError):
            CovarianceModel.from_json("[1, 2]")

    def test_label(self):
        assert CovarianceModel.fbm(0.35).label() == "fbm(0.35)"
        assert CovarianceModel.bifractional(0.6, 0.7).label() == "bifractional(0.6,0.7)"


class TestCovarianceValues:
    def test_brownian_is_min(self):
        m = CovarianceModel.fbm(0.5)
        assert cov_eval(m, 0.3, 0.8) == pytest.approx(0.3, abs=1e-15)
        assert cov_eval(m, 0.9, 0.2) == pytest.approx(0.2, abs=1e-15)

    def test_fbm_frozen_value(self):
        m = CovarianceModel.fbm(0.75)
        assert cov_eval(m, 0.3, 0.7) == pytest.approx(0.24849828650596609, rel=1e-15)

    def test_bifractional_frozen_value(self):
        m = CovarianceModel.bifractional(0.6, 0.7)
        assert cov_eval(m, 0.4, 0.9) == pytest.approx(0.36128788659489625, rel=1e-15)

    def test_bifractional_k1_reduces_to_fbm(self):
        bi = CovarianceModel.bifractional(0.4, 1.0)
        fb = CovarianceModel.fbm(0.4)
        for s, t in [(0.2, 0.9), (0.5, 0.5), (0.0, 1.0)]:
            assert cov_eval(bi, s, t) == pytest.approx(cov_eval(fb, s, t), rel=1e-14)

    def test_fbm_sum_adds_components(self):
        m = CovarianceModel.fbm_sum(0.4, 0.8)
        a, b = CovarianceModel.fbm(0.4), CovarianceModel.fbm(0.8)
        assert cov_eval(m, 0.3, 0.6) == pytest.approx(
            cov_eval(a, 0.3, 0.6) + cov_eval(b, 0.3, 0.6), rel=1e-14
        )

    def test_rect_increment_brownian_is_overlap(self):
        m = CovarianceModel.fbm(0.5)
        # E[(X_t - X_s)(X_v - X_u)] = |[s,t] cap [u,v]| for Brownian motion
        assert rect_increment(m, Rectangle(0.1, 0.6, 0.4, 0.9)) == pytest.approx(0.2)
        assert rect_increment(m, Rectangle(0.0, 0.3, 0.5, 0.9)) == pytest.approx(0.0, abs=1e-15)

    def test_sigma_sq(self):
        m = CovarianceModel.fbm(0.75)
        assert sigma_sq(m, 0.3, 0.7) == pytest.approx(0.25298221281347033, rel=1e-14)
        assert sigma_sq(m, 0.4, 0.4) == 0.0
        with pytest.raises(ValueError):
            sigma_sq(m, 0.7, 0.3)

    def test_rho_attribute(self):
        assert CovarianceModel.fbm(0.5).rho == pytest.approx(1.0)
        assert CovarianceModel.fbm(0.75).rho == pytest.approx(1.0)
        assert CovarianceModel.fbm(0.35).rho == pytest.approx(1.0 / 0.7)


class TestGram:
    @pytest.mark.parametrize(
        "model",
        [
            CovarianceModel.fbm(0.35),
            CovarianceModel.fbm(0.5),
            CovarianceModel.fbm(0.9),
            CovarianceModel.bifractional(0.6, 0.7),
            CovarianceModel.fbm_sum(0.3, 0.8),
        ],
        ids=lambda m: m.label(),
    )
    def test_increment_gram_psd(self, model):
        P = make_uniform_partition(1.0, 32)
        G = increment_gram(model, P)
        assert G.shape == (32, 32)
        np.testing.assert_allclose(G, G.T, atol=1e-14)
        check_gram_psd(G)  # raises on violation

    def test_gram_diagonal_matches_sigma_sq(self):
        model = CovarianceModel.fbm(0.7)
        P = make_uniform_partition(1.0, 8)
        G = increment_gram(model, P)
        for k in range(8):
            assert G[k, k] == pytest.approx(
                sigma_sq(model, P.points[k], P.points[k + 1]), rel=1e-12
            )

    def test_check_gram_psd_raises_on_negative(self):
        with pytest.raises(ModelInvalidError):
            check_gram_psd(np.diag([1.0, -0.5]))
        # tiny deficits inside the tolerance band are reported, not fatal
        w_min = check_gram_psd(np.diag([1.0, -1e-12]))
        assert w_min == pytest.approx(-1e-12)


class TestRhoVariation:
    def test_brownian_square_is_exact(self):
        # independent increments: every refinement gives the same value T
        m = CovarianceModel.fbm(0.5)
        rect = Rectangle(0.0, 1.0, 0.0, 1.0)
        for n in (4, 8, 16, 32):
            P = make_uniform_partition(1.0, n)
            v = two_d_rho_variation(m, rect, (P, P), 1.0)
            assert abs(v - 1.0) <= 1e-10

    def test_matches_brute_force_small_grid(self):
        m = CovarianceModel.fbm(0.75)
        rect = Rectangle(0.0, 1.0, 0.0, 1.0)
        P = make_uniform_partition(1.0, 4)
        Q = make_uniform_partition(1.0, 3)
        got = two_d_rho_variation(m, rect, (P, Q), 1.0)
        want = brute_force_rho_variation(m, rect, P, Q, 1.0)
        assert got == pytest.approx(want, rel=1e-12)

    def test_matches_brute_force_rho_above_one(self):
        m = CovarianceModel.fbm(0.35)
        rect = Rectangle(0.0, 0.5, 0.0, 0.5)
        P = make_uniform_partition(0.5, 4)
        Q = make_uniform_partition(0.5, 4)
        rho = m.rho
        got = two_d_rho_variation(m, rect, (P, Q), rho)
        want = brute_force_rho_variation(m, rect, P, Q, rho)
        assert got == pytest.approx(want, rel=1e-12)

    def test_degenerate_rectangle_is_zero(self):
        m = CovarianceModel.fbm(0.5)
        rect = Rectangle(0.0, 0.0, 0.0, 1.0)
        P = make_uniform_partition(1.0, 1)
        Q = make_uniform_partition(1.0, 4)
        assert two_d_rho_variation(m, rect, (P, Q), 1.0) == 0.0

    def test_off_origin_rectangle(self):
        # grids are relative to the rectangle corner
        m = CovarianceModel.fbm(0.5)
        rect = Rectangle(0.25, 0.75, 0.5, 1.0)
        P = make_uniform_partition(0.5, 4)
        got = two_d_rho_variation(m, rect, (P, P), 1.0)
        want = brute_force_rho_variation(m, rect, P, P, 1.0)
        assert got == pytest.approx(want, rel=1e-12)

    def test_large_grid_uses_ascent_and_stays_sane(self):
        # beyond the exhaustive cap the coordinate-ascent lower bound applies;
        # for Brownian motion with rho=1 it must still find exactly T
        m = CovarianceModel.fbm(0.5)
        rect = Rectangle(0.0, 1.0, 0.0, 1.0)
        P = make_uniform_partition(1.0, 40)
        v = two_d_rho_variation(m, rect, (P, P), 1.0)
        assert abs(v - 1.0) <= 1e-10
