import cmath
import math

import numpy as np
import pytest

from kvgreen import laplace, modal
from kvgreen.errors import DomainError, PoleError
from kvgreen.modal import MediumParams

PRM = MediumParams(1.3, 1.0, 0.2)


@pytest.mark.parametrize("s", [0.7, 2.0 + 3.0j, -1.5 + 0.5j, 10.0 - 20.0j])
@pytest.mark.parametrize("x,xi", [(0.3, 0.6), (0.5, 0.5), (0.9, 0.1)])
def test_closed_form_matches_modal_sum(s, x, xi):
    got = laplace.green_hat(PRM, x, xi, s)
    ref = laplace.green_hat_modal(PRM, x, xi, s, n_terms=40000)
    assert abs(got - ref) <= 1e-9 * abs(ref)


def test_wave_case_closed_form():
    # eps = 0: g(y) = cosh((l - y) s/c) / (2 c s sinh(l s/c))
    prm = MediumParams(2.0, 1.0)
    s = 1.7
    sig = s / 2.0
    # G = g(|x - xi|) - g(x + xi) at x = 0.2, xi = 0.3
    got = laplace.green_hat(prm, 0.2, 0.3, s)
    want = (math.cosh((1 - 0.1) * sig) - math.cosh((1 - 0.5) * sig)) / (2 * 2.0**2 * sig * math.sinh(sig))
    assert got.real == pytest.approx(want, rel=1e-13)


def test_huge_frequency_does_not_overflow():
    val = laplace.green_hat(PRM, 0.4, 0.41, 1e6 + 1e6j)
    assert cmath.isfinite(val)


def test_identity_report_shape():
    rep = laplace.verify_identity_210(PRM, 0.3, 0.7, [1.0, 2.0 + 1.0j])
    assert rep.name == "laplace_identity"
    assert rep.passed(1e-10)
    assert len(rep.details["samples"]) == 2


def test_identity_rejects_points_outside_half_plane():
    with pytest.raises(DomainError):
        laplace.verify_identity_210(PRM, 0.3, 0.7, [-PRM.c**2 / PRM.eps - 1.0])


def test_branch_cut_rejected():
    with pytest.raises(DomainError):
        laplace.sigma_eps(PRM, -PRM.c**2 / PRM.eps - 2.0)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_poles_sit_at_modal_frequencies(n):
    pole = laplace.find_pole(PRM, n)
    m = modal.mode(PRM, n)
    assert pole.real == pytest.approx(-m.decay, rel=1e-10)
    assert pole.imag == pytest.approx(m.a * m.omega, rel=1e-10)


def test_overdamped_pole_search_refused():
    with pytest.raises(DomainError):
        laplace.find_pole(PRM, 5)


def test_pole_raises():
    pole = laplace.find_pole(PRM, 1)
    with pytest.raises(PoleError):
        laplace.green_hat(PRM, 0.3, 0.6, pole)


def test_half_plane_predicate():
    assert laplace.in_half_plane(PRM, -8.0)
    assert not laplace.in_half_plane(PRM, -9.0)
    assert laplace.in_half_plane(MediumParams(1.0, 1.0), -1e9)


def test_zero_at_boundary():
    vals = [laplace.green_hat(PRM, 0.0, xi, 2.0 + 1.0j) for xi in np.linspace(0.1, 0.9, 5)]
    assert np.allclose(vals, 0.0, atol=1e-15)
