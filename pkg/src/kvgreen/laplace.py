"""Laplace-domain kernels of the strip problem.

With ``D = eps s + c^2`` and ``sigma = s / sqrt(D)``, the transformed
Green function is the image combination ``g(|x - xi|) - g(x + xi)`` of

    g(y, s) = cosh((l - y) sigma) / (2 D sigma sinh(l sigma)).

Setting ``eps = 0`` gives the pure-wave kernel; the two are linked by
``G_eps(s) = c^2 / D * G_0(c s / sqrt(D))``, which holds in the half-plane
``Re s > -c^2 / eps``. Time-domain answers come from the modal series and
the Bessel-kernel transform, not from numerical inversion.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable

import numpy as np

from .checks import IdentityReport, relative_deviation
from .errors import DomainError, PoleError
from .modal import MediumParams

__all__ = [
    "sigma_eps",
    "g_hat",
    "green_hat",
    "green_hat_modal",
    "verify_identity_210",
    "find_pole",
    "in_half_plane",
]

_POLE_TOL = 1e-13


def _expm1(z: complex) -> complex:
    # cmath has no expm1; the series keeps precision near zero
    if abs(z) < 1e-3:
        return z * (1 + z / 2 * (1 + z / 3 * (1 + z / 4 * (1 + z / 5 * (1 + z / 6)))))
    return cmath.exp(z) - 1.0


def in_half_plane(params: MediumParams, s: complex) -> bool:
    """True when ``s`` lies in ``Re s > -c^2 / eps`` (everywhere if eps = 0)."""
    if params.eps == 0:
        return True
    return complex(s).real > -params.c**2 / params.eps


def sigma_eps(params: MediumParams, s: complex) -> complex:
    """``s / sqrt(eps s + c^2)`` on the principal branch."""
    s = complex(s)
    if params.eps == 0:
        return s / params.c
    d = params.eps * s + params.c**2
    if d.imag == 0 and d.real <= 0:
        raise DomainError("eps*s + c^2 lies on the branch cut (-inf, 0]")
    return s / cmath.sqrt(d)


def g_hat(params: MediumParams, y: float, s: complex) -> complex:
    """Kernel ``cosh((l-y) sigma) / (2 D sigma sinh(l sigma))``.

    The ratio is even in ``sigma``, so ``sigma`` is reflected into
    ``Re >= 0`` and rewritten as
    ``(e^{-y sigma} + e^{-(2l-y) sigma}) / (1 - e^{-2 l sigma})``, which
    cannot overflow.
    """
    if not -1e-12 <= y <= 2 * params.l + 1e-12:
        raise DomainError("y must lie in [0, 2l]")
    s = complex(s)
    sig = sigma_eps(params, s)
    if sig.real < 0:
        sig = -sig
    d = params.eps * s + params.c**2
    denom = -_expm1(-2.0 * params.l * sig)
    if abs(denom) < _POLE_TOL or abs(sig) == 0:
        raise PoleError(f"s = {s} is a pole of the strip kernel")
    num = cmath.exp(-y * sig) + cmath.exp(-(2.0 * params.l - y) * sig)
    return num / denom / (2.0 * d * sig)


def green_hat(params: MediumParams, x: float, xi: float, s: complex) -> complex:
    """Transformed Green function ``g(|x - xi|) - g(x + xi)``."""
    return g_hat(params, abs(x - xi), s) - g_hat(params, x + xi, s)


def green_hat_modal(params: MediumParams, x: float, xi: float, s: complex, n_terms: int = 20000) -> complex:
    """Independent modal evaluation of the transformed Green function.

    Sums the Laplace transforms ``(2/l) sin sin / (s^2 + K_n (c^2 + eps s))``
    of the modal series with ``K_n = (n pi / l)^2``. The static part
    ``1 / (K_n D)`` is summed in closed form (it is the Dirichlet Green
    function of ``-d^2/dx^2``), leaving an O(n^-4) remainder.
    """
    s = complex(s)
    d = params.c**2 + params.eps * s
    n = np.arange(1, n_terms + 1, dtype=float)
    kn = (np.pi * n / params.l) ** 2
    spatial = (2.0 / params.l) * np.sin(np.pi * n * x / params.l) * np.sin(np.pi * n * xi / params.l)
    lo, hi = min(x, xi), max(x, xi)
    static = lo * (params.l - hi) / (params.l * d)
    remainder = -s * s / (kn * d * (s * s + kn * d))
    return static + complex(np.sum(spatial * remainder))


def verify_identity_210(
    params: MediumParams, x: float, xi: float, s_samples: Iterable[complex]
) -> IdentityReport:
    """Compare ``G_eps(s)`` with ``c^2/D * G_0(c s / sqrt(D))`` at each sample.

    The left side calls the viscous kernel directly; the right side builds
    the inviscid kernel at the mapped frequency. Deviations are reported,
    never raised.
    """
    wave = params.with_eps(0.0)
    worst = 0.0
    worst_pair = (0j, 0j)
    rows = []
    for s in s_samples:
        s = complex(s)
        if not in_half_plane(params, s):
            raise DomainError(f"s = {s} is outside the half-plane Re s > -c^2/eps")
        lhs = green_hat(params, x, xi, s)
        d = params.eps * s + params.c**2
        mapped = params.c * s / cmath.sqrt(d)
        rhs = params.c**2 / d * green_hat(wave, x, xi, mapped)
        dev = relative_deviation(lhs, rhs)
        rows.append((s, dev))
        if dev >= worst:
            worst, worst_pair = dev, (lhs, rhs)
    return IdentityReport("laplace_identity", worst_pair[0], worst_pair[1], worst, {"samples": rows})


def find_pole(params: MediumParams, n: int, max_iter: int = 60) -> complex:
    """Locate the pole of the strip kernel belonging to mode ``n``.

    Poles sit where ``l sigma(s) = i pi n``. Newton's method on
    ``sinh(l sigma(s))`` starts from a point displaced from the modal
    prediction, so the result is an independent check of the modal data.
    """
    if params.eps <= 0:
        raise DomainError("poles are only damped for eps > 0")
    a = math.pi * params.c * n / params.l
    decay = math.pi**2 * n**2 * params.eps / (2.0 * params.l**2)
    gap = 1.0 - (n / params.k) ** 2
    if gap <= 0:
        raise DomainError("find_pole handles underdamped modes only")
    s = complex(-decay * 1.02, a * math.sqrt(gap) * 0.98)

    def f(z):
        return cmath.sinh(params.l * sigma_eps(params, z))

    def df(z):
        d = params.eps * z + params.c**2
        dsig = (1.0 / cmath.sqrt(d)) - 0.5 * params.eps * z / d**1.5
        return params.l * cmath.cosh(params.l * sigma_eps(params, z)) * dsig

    for _ in range(max_iter):
        step = f(s) / df(s)
        s -= step
        if abs(step) <= 1e-15 * max(1.0, abs(s)):
            return s
    return s
