import numpy as np
import pytest

from roughquad import (
    ConfigError,
    ControlledPath,
    CovarianceModel,
    FUNCTION_CATALOG,
    RoughLift,
    finite_difference_check,
    from_function,
    make_function,
    make_uniform_partition,
    remainder_cells,
    remainder_report,
    sample_path,
    tensor_contract,
)
from roughquad.controlled import SmoothFunction


def naive_contract(u, v):
    """Index-loop oracle for tensor_contract."""
    k = u.ndim - 1
    kp = v.ndim
    out_shape = (u.shape[0],) + u.shape[1 + kp :]
    out = np.zeros(out_shape)
    for idx in np.ndindex(*u.shape):
        a, slots = idx[0], idx[1:]
        out[(a,) + slots[kp:]] += u[idx] * (v[slots[:kp]] if kp else v)
    return out


class TestCatalog:
    @pytest.mark.parametrize("name", sorted(FUNCTION_CATALOG))
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_derivatives_match_finite_differences(self, name, d):
        fn = make_function(name, d)
        assert finite_difference_check(fn) < 1e-6

    def test_broken_derivative_detected(self):
        base = make_function("sin", 1)
        broken = SmoothFunction(
            name="broken",
            d=1,
            m=base.m,
            f=base.f,
            df=lambda x: base.df(x) * 1.01,
            d2f=base.d2f,
            d3f=base.d3f,
        )
        with pytest.raises(ValueError, match="finite-difference"):
            finite_difference_check(broken)

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            make_function("cubic", 2)
        with pytest.raises(ConfigError):
            make_function("sin", 0)

    def test_batched_shapes(self, rng):
        fn = make_function("sin-mix", 3)
        x = rng.normal(size=(5, 3))
        assert fn.f(x).shape == (5, fn.m)
        assert fn.df(x).shape == (5, fn.m, 3)
        assert fn.d2f(x).shape == (5, fn.m, 3, 3)
        assert fn.d3f(x).shape == (5, fn.m, 3, 3, 3)


class TestTensorContract:
    @pytest.mark.parametrize("k,kp", [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (1, 0)])
    def test_matches_loop_oracle(self, rng, k, kp):
        m, d = 2, 3
        u = rng.normal(size=(m,) + (d,) * k)
        v = rng.normal(size=(d,) * kp) if kp else np.float64(rng.normal())
        np.testing.assert_allclose(tensor_contract(u, v), naive_contract(u, v), atol=1e-13)

    def test_rank_mismatch(self, rng):
        u = rng.normal(size=(2, 3))
        with pytest.raises(ValueError):
            tensor_contract(u, rng.normal(size=(3, 3)))
        with pytest.raises(ValueError):
            tensor_contract(u, rng.normal(size=4))


def _brownian_setup(fn_name, d, n, seed=0):
    model = CovarianceModel.fbm(0.5)
    P = make_uniform_partition(1.0, n)
    X = sample_path(model, P, d=d, seed=seed)
    lift = RoughLift.from_path(X)
    return from_function(make_function(fn_name, d), X), lift


class TestControlledPath:
    def test_from_function_shapes(self):
        cp, _ = _brownian_setup("sin-mix", 2, 8)
        assert cp.y.shape == (9, 2)
        assert cp.y1.shape == (9, 2, 2)
        assert cp.y2.shape == (9, 2, 2, 2)
        assert cp.m == 2 and cp.d == 2

    def test_dimension_mismatch(self):
        model = CovarianceModel.fbm(0.5)
        P = make_uniform_partition(1.0, 4)
        X = sample_path(model, P, d=2, seed=0)
        with pytest.raises(ValueError):
            from_function(make_function("sin", 3), X)

    def test_restrict_picks_shared_points(self):
        cp, _ = _brownian_setup("sin", 1, 8)
        coarse = make_uniform_partition(1.0, 4)
        sub = cp.restrict(coarse)
        np.testing.assert_array_equal(sub.y, cp.y[::2])
        np.testing.assert_array_equal(sub.y2, cp.y2[::2])

    def test_shape_validation(self, rng):
        P = make_uniform_partition(1.0, 4)
        with pytest.raises(ValueError):
            ControlledPath(P, rng.normal(size=(5, 1)), rng.normal(size=(4, 1, 1)), rng.normal(size=(5, 1, 1, 1)))
        with pytest.raises(ValueError):
            ControlledPath(P, rng.normal(size=(5, 2)), rng.normal(size=(5, 1, 1)), rng.normal(size=(5, 1, 1, 1)))


class TestRemainders:
    def test_cells_match_per_cell_oracle(self, rng):
        cp, lift = _brownian_setup("sin-mix", 2, 16, seed=3)
        r0, r1 = remainder_cells(cp, lift)
        for k in (0, 7, 15):
            cell = lift.levels(k, k + 1)
            want0 = (
                cp.y[k + 1]
                - cp.y[k]
                - cp.y1[k] @ cell.x1
                - np.einsum("ajl,jl->a", cp.y2[k], cell.x2)
            )
            want1 = cp.y1[k + 1] - cp.y1[k] - cp.y2[k] @ cell.x1
            np.testing.assert_allclose(r0[k], want0, atol=1e-13)
            np.testing.assert_allclose(r1[k], want1, atol=1e-13)

    def test_linear_function_has_zero_remainders(self):
        cp, lift = _brownian_setup("linear", 1, 32)
        r0, r1 = remainder_cells(cp, lift)
        assert np.max(np.abs(r0)) < 1e-14
        assert np.max(np.abs(r1)) < 1e-14

    def test_quadratic_r0_uses_geometric_second_level(self):
        # for f(x) = x^2/2 in d=1: dy = x dx + (dx)^2/2 = y1 X1 + y2 X2 exactly
        cp, lift = _brownian_setup("quadratic", 1, 32)
        r0, r1 = remainder_cells(cp, lift)
        assert np.max(np.abs(r0)) < 1e-14
        assert np.max(np.abs(r1)) < 1e-14


class TestRemainderReport:
    def test_exact_zero_flags(self):
        cp, lift = _brownian_setup("linear", 1, 128)
        report = remainder_report(cp, lift)
        assert report.r0_exact_zero and report.r1_exact_zero
        assert report.r0_exponent is None and report.r1_exponent is None

    def test_decay_exponents_for_smooth_function(self):
        cp, lift = _brownian_setup("sin", 1, 1024, seed=1)
        report = remainder_report(cp, lift, n_levels=6)
        # r0 is a second-order remainder, dy a first-order increment
        assert report.r0_exponent is not None
        assert report.dy_exponent is not None
        assert report.r0_exponent > report.dy_exponent
        assert len(report.levels) == 6

    def test_small_grid_rejected(self):
        cp, lift = _brownian_setup("sin", 1, 4)
        with pytest.raises(ValueError):
            remainder_report(cp, lift)
