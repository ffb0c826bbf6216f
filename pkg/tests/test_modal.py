import math
import warnings

import mpmath
import numpy as np
import pytest

from kvgreen import modal
from kvgreen.errors import DomainError, TruncationWarning
from kvgreen.modal import GreenPoint, MediumParams, SeriesPolicy


def test_medium_validation():
    for args in ((0.0, 1.0, 0.1), (1.0, -1.0, 0.1), (1.0, 1.0, -0.1), (math.inf, 1.0, 0.0)):
        with pytest.raises(DomainError):
            MediumParams(*args)
    assert MediumParams(1.0, 1.0).k == math.inf
    assert MediumParams(1.0, math.pi, 0.1).k == pytest.approx(20.0)


def test_regimes_classified():
    prm = MediumParams(1.0, math.pi, 0.1)  # k = 20
    assert modal.mode(prm, 19).regime == "underdamped"
    assert modal.mode(prm, 20).regime == "critical"
    assert modal.mode(prm, 21).regime == "overdamped"
    with pytest.raises(DomainError):
        modal.mode(prm, 0)


@pytest.mark.parametrize("n", [1, 7, 19, 20, 21, 40, 400])
def test_kernel_matches_mpmath(n):
    prm = MediumParams(1.0, math.pi, 0.1)
    t = 0.7
    mpmath.mp.dps = 40
    a = mpmath.mpf(n)
    d = mpmath.mpf(n) ** 2 * mpmath.mpf("0.1") / 2
    om2 = 1 - (a / 20) ** 2
    if om2 == 0:
        ref = mpmath.exp(-d * t) * a * t
    else:
        om = mpmath.sqrt(om2)
        ref = mpmath.re(mpmath.exp(-d * t) * mpmath.sin(a * om * t) / om)
    got = float(modal.mode_kernel(prm, np.array([n]), t)[0])
    assert got == pytest.approx(float(ref), rel=1e-12, abs=1e-300)


def test_overdamped_kernel_has_no_overflow():
    prm = MediumParams(1.0, 1.0, 1.0)
    vals = modal.mode_kernel(prm, np.arange(1, 5001), 50.0)
    assert np.all(np.isfinite(vals)) and np.all(vals >= 0)


def test_g_eps_mode_agrees_with_vector_kernel():
    prm = MediumParams(2.0, 1.5, 0.3)
    for n in (1, 3, 10, 30):
        m = modal.mode(prm, n)
        assert modal.g_eps_mode(m, 0.4) == pytest.approx(float(modal.mode_kernel(prm, np.array([n]), 0.4)[0]), rel=1e-12)


def test_images_equal_half_over_c_near_source():
    prm = MediumParams(2.0, 1.0)
    assert modal.green_wave_images(prm, GreenPoint(0.5, 0.5, 0.1)) == pytest.approx(0.25)
    assert modal.green_wave_images(prm, GreenPoint(0.5, 0.2, 0.1)) == 0.0


def test_images_period_and_odd_reflection():
    prm = MediumParams(1.0, 1.0)
    x, xi, t = 0.3, 0.6, 0.47
    g = modal.green_wave_images(prm, GreenPoint(x, xi, t))
    assert modal.green_wave_images(prm, GreenPoint(x, xi, t + 2.0)) == pytest.approx(g)
    # G0 is antiperiodic under a half period with the source reflected
    assert modal.green_wave_images(prm, GreenPoint(x, xi, t + 1.0)) == pytest.approx(-modal.green_wave_images(prm, GreenPoint(x, 1 - xi, t)))


def test_fejer_series_approaches_images_off_fronts():
    prm = MediumParams(1.0, 1.0)
    pt = GreenPoint(0.3, 0.6, 0.8)
    got = modal.green_wave_series(prm, pt, SeriesPolicy(max_modes=4000, summation="fejer"))
    assert got == pytest.approx(modal.green_wave_images(prm, pt), abs=2e-3)


def test_jump_times_listed():
    prm = MediumParams(1.0, 1.0)
    assert modal.wave_green_jumps(prm, 0.3, 0.6, 1.0) == pytest.approx([0.3, 0.9])


def test_eps_series_matches_mpmath_sum():
    # tau = 45: both the oscillatory and the slow overdamped tails are negligible past n = 200
    prm = MediumParams(1.0, 1.0, 0.02)
    pt = GreenPoint(0.3, 0.6, 0.9)
    mpmath.mp.dps = 30
    k = 2 / (mpmath.pi * mpmath.mpf("0.02"))

    def term(n):
        a = mpmath.pi * n
        d = mpmath.pi**2 * n**2 * mpmath.mpf("0.02") / 2
        om = mpmath.sqrt(mpmath.mpc(1 - (n / k) ** 2))
        kern = mpmath.re(mpmath.exp(-d * mpmath.mpf("0.9")) * mpmath.sin(a * om * mpmath.mpf("0.9")) / om)
        return kern * mpmath.sin(a * mpmath.mpf("0.3")) * mpmath.sin(a * mpmath.mpf("0.6")) / n

    ref = 2 / mpmath.pi * mpmath.fsum(term(n) for n in range(1, 200))
    assert modal.green_eps_series(prm, pt) == pytest.approx(float(ref), abs=1e-10)


def test_eps_series_requires_positive_viscosity():
    with pytest.raises(DomainError):
        modal.green_eps_series(MediumParams(1.0, 1.0), GreenPoint(0.5, 0.5, 1.0))


def test_truncation_bound_is_certified():
    prm = MediumParams(1.0, 1.0, 0.05)
    policy = SeriesPolicy(tail_tol=1e-9)
    n_modes, tail = modal.eps_series_truncation(prm, 1.0, policy)
    assert tail < 1e-9
    n = np.arange(n_modes + 1, 200_000, dtype=float)
    actual = 2 / math.pi * float(np.sum(np.abs(modal.mode_kernel(prm, n, 1.0)) / n))
    assert actual <= tail


def test_slow_overdamped_tail_is_reported():
    # at tau = 4.5 the overdamped modes all decay like exp(-c^2 t / eps), so the tail is O(1/N)
    prm = MediumParams(1.0, 1.0, 0.2)
    n_modes, tail = modal.eps_series_truncation(prm, 0.9, SeriesPolicy())
    assert n_modes == 20000 and 1e-7 < tail < 1e-5


def test_truncation_warning_when_capped():
    prm = MediumParams(1.0, 1.0, 0.01)
    with pytest.warns(TruncationWarning):
        modal.green_eps_series(prm, GreenPoint(0.5, 0.5, 1e-4), SeriesPolicy(max_modes=50))


def test_point_checks():
    prm = MediumParams(1.0, 1.0)
    with pytest.raises(DomainError):
        GreenPoint(1.5, 0.5, 1.0).check(prm)
    with pytest.raises(DomainError):
        GreenPoint(0.5, 0.5, -1.0).check(prm)


def test_series_vanishes_at_ends_and_is_symmetric():
    prm = MediumParams(1.0, 1.0, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        assert modal.green_eps_series(prm, GreenPoint(0.0, 0.4, 0.7)) == pytest.approx(0.0, abs=1e-14)
        a = modal.green_eps_series(prm, GreenPoint(0.2, 0.7, 0.7))
        b = modal.green_eps_series(prm, GreenPoint(0.7, 0.2, 0.7))
    assert a == pytest.approx(b, abs=1e-14)
