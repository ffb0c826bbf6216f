"""Mode algebra and the exact time-domain Green functions on the strip.

The strip is ``0 <= x <= l`` with homogeneous Dirichlet ends. Mode ``n``
has spatial shape ``sin(n pi x / l)``, wave frequency ``a = pi c n / l``
and viscous decay rate ``pi^2 n^2 eps / (2 l^2)``. With
``k = 2 c l / (pi eps)`` the frequency factor ``omega = sqrt(1 - (n/k)^2)``
separates underdamped (n < k), critical (n = k) and overdamped (n > k)
modes. For overdamped modes ``sin(a omega t) / omega`` is continued to
``sinh(a |omega| t) / |omega|``, which is what the damped-oscillator ODE
of each mode requires.

Normalization: ``G0`` is the response to a unit velocity impulse, so
``G0 -> 1/(2c)`` just after the impulse at the source point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .errors import DomainError, TruncationWarning

__all__ = [
    "MediumParams",
    "Mode",
    "GreenPoint",
    "SeriesPolicy",
    "CRITICAL_THRESHOLD",
    "mode",
    "g_eps_mode",
    "mode_kernel",
    "green_wave_series",
    "green_wave_images",
    "wave_green_jumps",
    "green_eps_series",
    "eps_series_truncation",
]

CRITICAL_THRESHOLD = 1e-8

Regime = Literal["underdamped", "critical", "overdamped"]
_UNDER, _CRIT, _OVER = 0, 1, 2
_REGIME_NAMES = {_UNDER: "underdamped", _CRIT: "critical", _OVER: "overdamped"}


@dataclass(frozen=True)
class MediumParams:
    """Wave speed ``c``, strip length ``l`` and viscosity ``eps``."""

    c: float
    l: float
    eps: float = 0.0

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError("wave speed c must be positive")
        if not (self.l > 0 and math.isfinite(self.l)):
            raise DomainError("strip length l must be positive")
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise DomainError("viscosity eps must be non-negative")

    @property
    def k(self) -> float:
        """Critical mode index ``2 c l / (pi eps)``; infinite when eps = 0."""
        if self.eps == 0:
            return math.inf
        return 2.0 * self.c * self.l / (math.pi * self.eps)

    def with_eps(self, eps: float) -> "MediumParams":
        return replace(self, eps=eps)


@dataclass(frozen=True)
class Mode:
    n: int
    a: float
    decay: float
    omega: float
    regime: Regime


@dataclass(frozen=True)
class GreenPoint:
    """Field point ``x``, source point ``xi`` and time ``t``."""

    x: float
    xi: float
    t: float

    def check(self, params: MediumParams) -> None:
        tol = 1e-12 * params.l
        if not (-tol <= self.x <= params.l + tol and -tol <= self.xi <= params.l + tol):
            raise DomainError("x and xi must lie in [0, l]")
        if self.t < 0:
            raise DomainError("t must be non-negative")


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation and summation policy for the modal series."""

    max_modes: int = 20000
    tail_tol: float = 1e-10
    summation: Literal["direct", "fejer"] = "direct"

    def __post_init__(self):
        if self.max_modes < 1:
            raise ValueError("max_modes must be >= 1")
        if self.summation not in ("direct", "fejer"):
            raise ValueError("summation must be 'direct' or 'fejer'")


def _mode_arrays(params: MediumParams, n: np.ndarray):
    n = np.asarray(n, dtype=float)
    a = math.pi * params.c * n / params.l
    decay = math.pi**2 * n**2 * params.eps / (2.0 * params.l**2)
    if params.eps == 0:
        ones = np.ones_like(n)
        return a, decay, ones, ones, np.full(n.shape, _UNDER)
    r = n / params.k
    gap = 1.0 - r * r
    omega = np.sqrt(np.abs(gap))
    regime = np.where(np.abs(gap) < CRITICAL_THRESHOLD, _CRIT, np.where(gap > 0, _UNDER, _OVER))
    omega = np.where(regime == _CRIT, 0.0, omega)
    return a, decay, omega, r, regime


def mode(params: MediumParams, n: int) -> Mode:
    """Modal data for index ``n >= 1``, with the damping regime classified."""
    if n < 1:
        raise DomainError("mode index must be >= 1")
    a, decay, omega, _, regime = _mode_arrays(params, np.array([n]))
    return Mode(int(n), float(a[0]), float(decay[0]), float(omega[0]),
                _REGIME_NAMES[int(regime[0])])


def _kernel(a, decay, omega, r, regime, t):
    """Vectorized viscous time kernel; arguments broadcast against ``t``."""
    t = np.asarray(t, dtype=float)
    a, decay, omega, r, regime = np.broadcast_arrays(a, decay, omega, r, regime)
    shape = np.broadcast_shapes(a.shape, t.shape)
    a, decay, omega, r, regime, t = (np.broadcast_to(v, shape) for v in (a, decay, omega, r, regime, t))
    out = np.zeros(shape)
    under = regime == _UNDER
    if np.any(under):
        om = omega[under]
        out[under] = np.exp(-decay[under] * t[under]) * np.sin(a[under] * om * t[under]) / om
    crit = regime == _CRIT
    if np.any(crit):
        out[crit] = np.exp(-decay[crit] * t[crit]) * a[crit] * t[crit]
    over = regime == _OVER
    if np.any(over):
        om = omega[over]
        growth = a[over] * om
        # decay - a|omega| = a / (r + |omega|) > 0, written without cancellation
        net = a[over] / (r[over] + om)
        tt = t[over]
        out[over] = np.exp(-net * tt) * (-np.expm1(-2.0 * growth * tt)) / (2.0 * om)
    return out


def mode_kernel(params: MediumParams, n, t):
    """``e^{-decay t} sin(a omega t) / omega`` for arrays of modes and times."""
    a, decay, omega, r, regime = _mode_arrays(params, n)
    return _kernel(a, decay, omega, r, regime, t)


def g_eps_mode(m: Mode, t: float) -> float:
    """Time kernel of a single viscous mode.

    Underdamped: ``e^{-decay t} sin(a omega t) / omega``; critical:
    ``e^{-decay t} a t``; overdamped: ``e^{-decay t} sinh(a |omega| t) / |omega|``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    code = {v: k for k, v in _REGIME_NAMES.items()}[m.regime]
    if m.regime == "overdamped":
        r = math.sqrt(1.0 + m.omega**2)
    else:
        r = math.sqrt(max(0.0, 1.0 - m.omega**2))
    return float(_kernel(m.a, m.decay, m.omega, r, code, t))


def _spatial(params: MediumParams, n: np.ndarray, x: float, xi: float) -> np.ndarray:
    kx = math.pi * n / params.l
    return np.sin(kx * x) * np.sin(kx * xi)


def _fejer(n: np.ndarray, n_max: int) -> np.ndarray:
    return 1.0 - n / (n_max + 1.0)


def green_wave_series(params: MediumParams, p: GreenPoint, policy: SeriesPolicy = SeriesPolicy()) -> float:
    """Partial sum of the Fourier series of the pure-wave Green function.

    The series converges only conditionally (terms ~ 1/n), so the full
    ``policy.max_modes`` terms are always used; Fejer averaging damps the
    Gibbs ringing near the wavefronts.
    """
    p.check(params)
    n = np.arange(1, policy.max_modes + 1, dtype=float)
    terms = np.sin(math.pi * params.c * n * p.t / params.l) * _spatial(params, n, p.x, p.xi) / n
    if policy.summation == "fejer":
        terms *= _fejer(n, policy.max_modes)
    return float(2.0 / (params.c * math.pi) * np.sum(terms))


def _image_sources(params: MediumParams, xi: float, t: float):
    m_max = math.ceil(params.c * t / (2.0 * params.l)) + 1
    m = np.arange(-m_max, m_max + 1, dtype=float)
    positive = 2.0 * m * params.l + xi
    negative = 2.0 * m * params.l - xi
    return positive, negative


def green_wave_images(params: MediumParams, p: GreenPoint) -> float:
    """Closed-form pure-wave Green function by the method of images.

    The odd periodic extension of the strip places sources ``+1/(2c)`` at
    ``2 m l + xi`` and sinks ``-1/(2c)`` at ``2 m l - xi``; each contributes
    once ``c t`` exceeds its distance to ``x``. On a wavefront the step
    takes its midpoint value, matching the limit of the Fourier series.
    """
    p.check(params)
    positive, negative = _image_sources(params, p.xi, p.t)
    ct = params.c * p.t
    step = lambda d: np.sign(ct - d) * 0.5 + 0.5  # noqa: E731
    total = np.sum(step(np.abs(p.x - positive))) - np.sum(step(np.abs(p.x - negative)))
    return float(total / (2.0 * params.c))


def wave_green_jumps(params: MediumParams, x: float, xi: float, t_max: float) -> list[float]:
    """Times in ``(0, t_max]`` at which the images Green function jumps."""
    positive, negative = _image_sources(params, xi, t_max)
    d = np.concatenate([np.abs(x - positive), np.abs(x - negative)]) / params.c
    return sorted({float(v) for v in d if 0.0 < v <= t_max})


def _eps_envelope(params: MediumParams, n: np.ndarray, t: float) -> np.ndarray:
    """Per-term bound on |kernel| / n, without the 2/(pi c) prefactor."""
    a, decay, omega, r, regime = _mode_arrays(params, n)
    env = np.empty_like(a)
    over = regime == _OVER
    not_over = ~over
    with np.errstate(divide="ignore"):
        inv = np.where(omega > 0, 1.0 / np.where(omega > 0, omega, 1.0), np.inf)
    env[not_over] = np.exp(-decay[not_over] * t) * np.minimum(a[not_over] * t, inv[not_over])
    if np.any(over):
        net = a[over] / (r[over] + omega[over])
        env[over] = np.exp(-net * t) * np.minimum(a[over] * t, 0.5 * inv[over])
    return env / n


def eps_series_truncation(params: MediumParams, t: float, policy: SeriesPolicy) -> tuple[int, float]:
    """Smallest mode count whose certified tail bound is below ``tail_tol``.

    Returns ``(n_modes, tail_bound)``. Beyond the scanned range every mode
    is overdamped with ``|omega| >= n / (k sqrt 2)`` and decays at least at
    the fast rate ``c^2 / eps``, so the remainder is bounded by
    ``sqrt(2) k exp(-c^2 t / eps) / (pi c M)``.
    """
    k = params.k
    scan = int(max(2 * policy.max_modes, math.ceil(2.0 * k) + 2))
    n = np.arange(1, scan + 1, dtype=float)
    env = 2.0 / (math.pi * params.c) * _eps_envelope(params, n, t)
    beyond = math.sqrt(2.0) * k * math.exp(-params.c**2 * t / params.eps) / (math.pi * params.c * scan)
    if t == 0:
        beyond = 0.0
    tail = np.cumsum(env[::-1])[::-1]
    tail_after = np.append(tail[1:], 0.0) + beyond
    ok = np.nonzero(tail_after[: policy.max_modes] < policy.tail_tol)[0]
    if ok.size:
        n_modes = int(ok[0]) + 1
    else:
        n_modes = policy.max_modes
    return n_modes, float(tail_after[n_modes - 1])


def green_eps_series(params: MediumParams, p: GreenPoint, policy: SeriesPolicy = SeriesPolicy()) -> float:
    """Fourier series of the viscous Green function, with certified truncation.

    Emits :class:`~kvgreen.errors.TruncationWarning` when ``max_modes``
    is reached before the tail bound falls below ``policy.tail_tol``
    (typical for ``t`` much smaller than ``eps / c^2``).
    """
    if params.eps <= 0:
        raise DomainError("green_eps_series needs eps > 0; use green_wave_series")
    p.check(params)
    n_modes, tail = eps_series_truncation(params, p.t, policy)
    if tail >= policy.tail_tol:
        warnings.warn(
            f"viscous series capped at {n_modes} modes, estimated tail {tail:.3e}",
            TruncationWarning, stacklevel=2,
        )
    n = np.arange(1, n_modes + 1, dtype=float)
    terms = mode_kernel(params, n, p.t) * _spatial(params, n, p.x, p.xi) / n
    if policy.summation == "fejer":
        terms *= _fejer(n, n_modes)
    return float(2.0 / (math.pi * params.c) * np.sum(terms))
