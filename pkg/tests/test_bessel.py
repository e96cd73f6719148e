import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import series_bessel_i

from circkde.bessel import (
    KAPPA_CAP,
    OVERFLOW_THRESHOLD,
    bessel_i,
    bessel_i_scaled,
    inverse_mean_resultant_ratio,
    is_saturated,
    log_bessel_i0,
    mean_resultant_ratio,
)


class TestBesselI:
    def test_order_zero_at_zero(self):
        assert bessel_i(0, 0.0) == 1.0

    def test_order_one_at_zero(self):
        assert bessel_i(1, 0.0) == 0.0

    @pytest.mark.parametrize("r,x", [(0, 1.0), (2, 2.0), (1, 0.5), (2, 10.0)])
    def test_matches_power_series(self, r, x):
        assert bessel_i(r, x) == pytest.approx(series_bessel_i(r, x), rel=1e-12)

    def test_series_accuracy_over_range(self):
        for r in (0, 1, 2):
            for x in np.linspace(0.1, 50.0, 40):
                assert bessel_i(r, x) == pytest.approx(series_bessel_i(r, x), rel=1e-12)

    def test_overflow_signalled(self):
        with pytest.raises(OverflowError):
            bessel_i(0, OVERFLOW_THRESHOLD + 10.0)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            bessel_i(-1, 1.0)
        with pytest.raises(ValueError):
            bessel_i(0, -0.5)

    @given(
        r=st.integers(min_value=0, max_value=3),
        x1=st.floats(min_value=1e-3, max_value=49.0),
        bump=st.floats(min_value=1e-3, max_value=1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_argument(self, r, x1, bump):
        assert bessel_i(r, x1 + bump) > bessel_i(r, x1)

    @given(x=st.floats(min_value=1e-6, max_value=100.0))
    @settings(max_examples=60, deadline=None)
    def test_order_decreasing(self, x):
        i0, i1, i2 = (bessel_i_scaled(r, x).value for r in (0, 1, 2))
        assert i0 > i1 > i2

    def test_recurrence_identity(self):
        # I0(x) - I2(x) == (2/x) I1(x)
        for x in np.linspace(0.1, 50.0, 60):
            lhs = bessel_i(0, x) - bessel_i(2, x)
            rhs = 2.0 / x * bessel_i(1, x)
            assert lhs == pytest.approx(rhs, rel=1e-10)


class TestScaled:
    def test_at_zero(self):
        sb = bessel_i_scaled(0, 0.0)
        assert sb.value == 1.0 and sb.scale_exponent == 0.0

    def test_scaled_value_example(self):
        assert bessel_i_scaled(0, 1.0).value == pytest.approx(
            math.exp(-1.0) * series_bessel_i(0, 1.0), rel=1e-12
        )

    def test_large_argument_via_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        expected = float(mp.besseli(2, 50) * mp.exp(-50))
        assert bessel_i_scaled(2, 50.0).value == pytest.approx(expected, rel=1e-12)
        assert bessel_i_scaled(2, 50.0).value > 0.0

    def test_finite_for_huge_arguments(self):
        for x in (1e3, 1e5, 1e6):
            sb = bessel_i_scaled(0, x)
            assert 0.0 < sb.value <= 1.0
            assert sb.scale_exponent == x

    def test_scaling_consistency(self):
        for x in np.linspace(0.1, 50.0, 40):
            sb = bessel_i_scaled(1, x)
            assert bessel_i(1, x) == pytest.approx(sb.value * math.exp(x), rel=1e-10)
            assert sb.unscaled() == pytest.approx(bessel_i(1, x), rel=1e-10)

    def test_log_property(self):
        sb = bessel_i_scaled(0, 30.0)
        assert sb.log == pytest.approx(math.log(series_bessel_i(0, 30.0)), rel=1e-12)
        assert log_bessel_i0(30.0) == pytest.approx(sb.log, rel=1e-12)


class TestMeanResultantRatio:
    def test_zero(self):
        assert mean_resultant_ratio(0.0) == 0.0

    def test_series_value(self):
        expected = series_bessel_i(1, 1.0) / series_bessel_i(0, 1.0)
        assert mean_resultant_ratio(1.0) == pytest.approx(expected, rel=1e-12)

    def test_large_kappa_asymptotic(self):
        # A(kappa) ~ 1 - 1/(2 kappa)
        a = mean_resultant_ratio(100.0)
        assert 0.99 < a < 1.0
        assert a == pytest.approx(1.0 - 1.0 / 200.0, abs=2e-5)

    def test_strictly_increasing(self):
        ks = np.linspace(0.0, 50.0, 200)
        vals = mean_resultant_ratio(ks)
        assert np.all(np.diff(vals) > 0)

    def test_vectorized(self):
        out = mean_resultant_ratio(np.array([0.0, 1.0, 2.0]))
        assert out.shape == (3,)


class TestInverse:
    def test_zero(self):
        assert inverse_mean_resultant_ratio(0.0) == 0.0

    def test_known_point(self):
        assert inverse_mean_resultant_ratio(0.4463899658965345) == pytest.approx(1.0, rel=1e-8)

    def test_saturation(self):
        k = inverse_mean_resultant_ratio(0.999999)
        assert k == KAPPA_CAP
        assert is_saturated(k)
        assert inverse_mean_resultant_ratio(1.0) == KAPPA_CAP

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            inverse_mean_resultant_ratio(-0.1)

    def test_round_trip(self):
        for kappa in np.geomspace(0.01, 100.0, 60):
            rbar = mean_resultant_ratio(kappa)
            assert inverse_mean_resultant_ratio(rbar) == pytest.approx(kappa, rel=1e-6)

    def test_solver_tolerance(self):
        for rbar in np.linspace(0.01, 0.99, 50):
            k = inverse_mean_resultant_ratio(rbar)
            assert abs(mean_resultant_ratio(k) - rbar) < 1e-10

    def test_vectorized_matches_scalar(self):
        # Entry-wise iteration counts differ, so agreement is to solver tol.
        rbars = np.array([0.0, 0.2, 0.7, 0.95])
        vec = inverse_mean_resultant_ratio(rbars)
        for r, k in zip(rbars, vec):
            assert k == pytest.approx(inverse_mean_resultant_ratio(float(r)), rel=1e-9, abs=1e-12)


def test_kappa_cap_large_enough():
    assert KAPPA_CAP >= 1e4
