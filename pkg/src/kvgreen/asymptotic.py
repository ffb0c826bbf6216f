"""Slow-time approximant of the viscous Green function.

Averaging the pure-wave response against a Gaussian in time,

    H(t) = c / sqrt(2 pi eps t) * int exp(-c^2 (s - t)^2 / (2 eps t)) G0(s) ds,

damps mode ``n`` by ``exp(-(pi n / l)^2 eps t / 2)`` and leaves its phase
alone. ``H`` splits into two waves ``H = H^- - H^+`` carried along
``y = x -+ c t``; each solves a heat equation in its moving frame with
diffusivity ``eps / 2``, and its ``x``-derivative is a difference of two
theta functions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, TruncationWarning
from .modal import GreenPoint, MediumParams, SeriesPolicy, green_eps_series, mode_kernel
from .specfun import DEFAULT_QUADRATURE, QuadratureSpec, integrate_vectorized, theta3
from .transform import TimeSignal

__all__ = [
    "SlowTimeFrame",
    "RemainderProbe",
    "gaussian_width",
    "h_convolution",
    "h_series",
    "h_split",
    "h_split_grid",
    "diffusion_wave_residual",
    "theta_form",
    "remainder_probe",
    "single_mode_amplitudes",
]

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class SlowTimeFrame:
    """Traveling coordinates ``y = x +- c t`` and slow time ``eps t / 2``."""

    y_plus: float
    y_minus: float
    theta: float

    def __post_init__(self):
        if self.theta < 0:
            raise DomainError("slow time must be non-negative")

    @classmethod
    def at(cls, params: MediumParams, x: float, t: float) -> "SlowTimeFrame":
        return cls(x + params.c * t, x - params.c * t, 0.5 * params.eps * t)

    def elapsed(self, params: MediumParams) -> float:
        return (self.y_plus - self.y_minus) / (2.0 * params.c)


@dataclass
class RemainderProbe:
    """Errors ``E = |G_eps - H|`` along a ladder of viscosities at fixed ``t``.

    ``rho1_estimates`` are ``E / |H|`` (NaN at points where ``|H|`` is
    below a tenth of its reference size, where the ratio is meaningless);
    ``rho2_estimates`` are what is left of ``E`` after the fitted
    ``k1 |H| / tau`` term. ``ratios`` holds ``E(eps) / E(eps / 2)`` for
    consecutive rungs, and ``order`` the least-squares slope of
    ``log E`` against ``log(1 / tau)``.
    """

    eps_ladder: tuple[float, ...]
    tau_grid: tuple[float, ...]
    errors: tuple[float, ...]
    h_values: tuple[float, ...]
    rho1_estimates: tuple[float, ...]
    rho2_estimates: tuple[float, ...]
    fitted_k1: float
    fitted_lambda2: float
    order: float
    ratios: tuple[float, ...]
    details: dict = field(default_factory=dict)

    def monotone(self) -> bool:
        e = np.asarray(self.errors)
        return bool(np.all(np.diff(e[1:]) < 0)) if e.size > 2 else True


def gaussian_width(params: MediumParams, t: float) -> float:
    """Standard deviation ``sqrt(eps t) / c`` of the time-averaging kernel."""
    return math.sqrt(params.eps * t) / params.c


def _extend(signal: TimeSignal, extension) -> Callable[[np.ndarray], np.ndarray]:
    if callable(extension):
        def ext(s):
            s = np.asarray(s, dtype=float)
            neg = s < 0
            pos_vals = signal(np.where(neg, 0.0, s))
            if not np.any(neg):
                return pos_vals
            neg_vals = np.asarray(extension(np.where(neg, s, -1.0)), dtype=float)
            mask = neg.reshape(neg.shape + (1,) * (pos_vals.ndim - neg.ndim))
            return np.where(mask, neg_vals, pos_vals)
        return ext
    if extension == "odd":
        def odd(s):
            s = np.asarray(s, dtype=float)
            vals = signal(np.abs(s))
            sign = np.sign(s).reshape(s.shape + (1,) * (vals.ndim - s.ndim))
            return np.where(sign < 0, -vals, vals)
        return odd
    if extension == "zero":
        def zero(s):
            s = np.asarray(s, dtype=float)
            vals = signal(np.maximum(s, 0.0))
            mask = (s < 0).reshape(s.shape + (1,) * (vals.ndim - s.ndim))
            return np.where(mask, 0.0, vals)
        return zero
    if extension == "none":
        return signal
    raise ValueError(f"unknown extension {extension!r}")


def h_convolution(
    signal: TimeSignal,
    params: MediumParams,
    t: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    extension: Literal["odd", "zero", "none"] | Callable = "odd",
):
    """Gaussian time average of ``signal`` centred at ``t``.

    Negative times are reached whenever the window ``t +- R`` crosses
    zero; ``extension`` says what the signal is there. ``"odd"`` mirrors
    it (the natural choice for Green functions, whose sine series is odd
    in time), ``"zero"`` switches it off, ``"none"`` forbids it and a
    callable supplies values directly. The window half-width ``R`` is set
    where the Gaussian falls below ``exp(spec.tail_cut_log)``.

    Raises
    ------
    ConvergenceError
        If the quadrature fails, or the discrete Gaussian mass misses 1
        by more than 1e-12.
    """
    if params.eps <= 0:
        raise DomainError("h_convolution needs eps > 0")
    if not t > 0:
        raise DomainError("t must be positive")
    width = gaussian_width(params, t)
    z_max = math.sqrt(-2.0 * spec.tail_cut_log)
    if extension == "none" and t - z_max * width < signal.validity[0]:
        raise DomainError("the averaging window reaches times where the signal is undefined")
    if t + z_max * width > signal.validity[1]:
        raise DomainError("the averaging window runs past the signal's validity interval")
    ext = _extend(signal, extension)
    norm = 1.0 / math.sqrt(2.0 * math.pi)

    def integrand(z):
        weight = norm * np.exp(-0.5 * z * z)
        vals = ext(t + width * z)
        stacked = np.concatenate([weight[:, None], (weight.reshape(weight.shape + (1,) * (vals.ndim - 1)) * vals).reshape(z.size, -1)], axis=1)
        return stacked

    lo, hi = t - z_max * width, t + z_max * width
    forward = signal.breaks(max(lo, 0.0), hi)
    mirrored = [-b for b in signal.breaks(0.0, -lo)] if lo < 0 and extension == "odd" else []
    cuts = [(b - t) / width for b in forward + mirrored + [0.0]]
    result = integrate_vectorized(integrand, -z_max, z_max, spec, breakpoints=cuts)
    mass = float(result.value[0])
    if abs(mass - 1.0) > _MASS_TOL:
        raise ConvergenceError(f"Gaussian mass {mass!r} is not 1 to {_MASS_TOL}", estimate=mass)
    shape = np.shape(signal(np.array([t])))[1:]
    value = np.asarray(result.value[1:]).reshape(shape)
    return float(value) if value.ndim == 0 else value


def _slow_decay(params: MediumParams, n: np.ndarray, t: float) -> np.ndarray:
    return np.exp(-((math.pi * n / params.l) ** 2) * params.eps * t / 2.0)


def _h_modes(params: MediumParams, t: float, policy: SeriesPolicy) -> int:
    """Mode count at which ``sum_{n > N} e^{-kappa n^2} / n`` drops below tolerance."""
    kappa = (math.pi / params.l) ** 2 * params.eps * t / 2.0
    if kappa <= 0:
        return policy.max_modes
    # tail <= e^{-kappa (N+1)^2} / (1 - e^{-kappa (2N + 3)})
    n = 1
    while n < policy.max_modes:
        tail = math.exp(-kappa * (n + 1) ** 2) / -math.expm1(-kappa * (2 * n + 3))
        if tail * 2.0 / (math.pi * params.c) < policy.tail_tol:
            return n
        n += 1
    warnings.warn(f"slow-time series capped at {n} modes", TruncationWarning, stacklevel=3)
    return n


def h_series(params: MediumParams, p: GreenPoint, policy: SeriesPolicy = SeriesPolicy()) -> float:
    """Fourier series of ``H``: the pure-wave series with each mode damped
    by ``exp(-(pi n / l)^2 eps t / 2)``."""
    if params.eps <= 0:
        raise DomainError("h_series needs eps > 0")
    p.check(params)
    n = np.arange(1, _h_modes(params, p.t, policy) + 1, dtype=float)
    k = math.pi * n / params.l
    terms = _slow_decay(params, n, p.t) * np.sin(params.c * k * p.t) * np.sin(k * p.x) * np.sin(k * p.xi) / n
    return float(2.0 / (params.c * math.pi) * np.sum(terms))


def h_split_grid(params: MediumParams, x, xi: float, t, policy: SeriesPolicy = SeriesPolicy()):
    """Vectorized ``(H^-, H^+)`` over broadcastable ``x`` and ``t`` arrays.

    ``H^+- = (1 / (c pi)) sum_n e^{-(pi n/l)^2 eps t / 2} sin(pi n xi / l)
    cos(pi n (x +- c t) / l) / n``, normalized so that ``H = H^- - H^+``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    t_min = float(np.min(t)) if t.size else 0.0
    n_modes = _h_modes(params, t_min, policy) if params.eps > 0 else policy.max_modes
    n = np.arange(1, n_modes + 1, dtype=float)
    k = math.pi * n / params.l
    x_b, t_b = np.broadcast_arrays(x, t)
    decay = np.exp(-np.multiply.outer(t_b, k * k) * params.eps / 2.0)
    weight = decay * np.sin(k * xi) / n
    ct = params.c * t_b
    h_minus = np.sum(weight * np.cos(np.multiply.outer(x_b - ct, k)), axis=-1) / (params.c * math.pi)
    h_plus = np.sum(weight * np.cos(np.multiply.outer(x_b + ct, k)), axis=-1) / (params.c * math.pi)
    return h_minus, h_plus


def h_split(params: MediumParams, p: GreenPoint, policy: SeriesPolicy = SeriesPolicy()) -> tuple[float, float]:
    """Backward and forward travelling parts ``(H^-, H^+)`` at one point."""
    if params.eps <= 0:
        raise DomainError("h_split needs eps > 0")
    p.check(params)
    h_minus, h_plus = h_split_grid(params, p.x, p.xi, p.t, policy)
    return float(h_minus), float(h_plus)


def diffusion_wave_residual(
    params: MediumParams,
    which: Literal["plus", "minus"],
    points: Sequence[tuple[float, float]],
    h: float,
    xi: float,
    policy: SeriesPolicy = SeriesPolicy(),
) -> float:
    """Largest central-difference residual of the moving-frame heat equation.

    ``H^-`` is tested against ``(eps/2) v_xx - v_t - c v_x`` and ``H^+``
    against ``(eps/2) v_xx - v_t + c v_x``. Every term of the series
    solves its equation exactly, so the residual is pure discretization
    error, O(h^2).
    """
    if which not in ("plus", "minus"):
        raise ValueError("which must be 'plus' or 'minus'")
    if h <= 0:
        raise DomainError("step must be positive")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, t = pts[:, 0], pts[:, 1]
    if np.any(x - h <= 0) or np.any(x + h >= params.l):
        raise DomainError("stencil must stay inside the strip")
    if np.any(t - h < 0):
        raise DomainError("stencil must not reach negative time")
    n_modes = _h_modes(params, float(np.min(t - h)), policy) if params.eps > 0 else policy.max_modes
    if h * math.pi * n_modes / params.l >= 0.5:
        raise DomainError(f"step too coarse for {n_modes} modes")
    part = 0 if which == "minus" else 1

    def v(xx, tt):
        return h_split_grid(params, xx, xi, tt, policy)[part]

    centre = v(x, t)
    v_xx = (v(x + h, t) - 2.0 * centre + v(x - h, t)) / (h * h)
    v_x = (v(x + h, t) - v(x - h, t)) / (2.0 * h)
    v_t = (v(x, t + h) - v(x, t - h)) / (2.0 * h)
    drift = -params.c if which == "minus" else params.c
    residual = 0.5 * params.eps * v_xx - v_t + drift * v_x
    return float(np.max(np.abs(residual)))


def theta_form(params: MediumParams, p: GreenPoint, which: Literal["plus", "minus"]) -> float:
    """``d/dx H^+-`` as a difference of two theta functions.

    With ``y = x +- c t`` and nome ``q = exp(-pi^2 eps t / (2 l^2))``,
    ``d/dx H^+- = -(1 / (4 c l)) [theta3((y - xi)/(2l), q) - theta3((y + xi)/(2l), q)]``.
    """
    if which not in ("plus", "minus"):
        raise ValueError("which must be 'plus' or 'minus'")
    if params.eps <= 0 or p.t <= 0:
        raise DomainError("theta form needs eps t > 0")
    p.check(params)
    y = p.x + params.c * p.t if which == "plus" else p.x - params.c * p.t
    nome = math.exp(-(math.pi**2) * params.eps * p.t / (2.0 * params.l**2))
    two_l = 2.0 * params.l
    diff = theta3((y - p.xi) / two_l, nome) - theta3((y + p.xi) / two_l, nome)
    return -diff / (4.0 * params.c * params.l)


def single_mode_amplitudes(params: MediumParams, n: int, t: float) -> tuple[float, float]:
    """Exact viscous and slow-time amplitudes of mode ``n`` at time ``t``.

    These are ``e^{-d t} sin(a omega t) / omega`` and ``e^{-d t} sin(a t)``;
    their ratio to the undamped ``sin(a t)`` envelope is the crossover
    factor ``e^{-d t}``.
    """
    exact = float(mode_kernel(params, np.array([float(n)]), t)[0])
    a = math.pi * params.c * n / params.l
    approx = float(_slow_decay(params, np.array([float(n)]), t)[0]) * math.sin(a * t)
    return exact, approx


def _mode_sum(params: MediumParams, p: GreenPoint, n_modes: int) -> tuple[float, float]:
    n = np.arange(1, n_modes + 1, dtype=float)
    k = math.pi * n / params.l
    spatial = np.sin(k * p.x) * np.sin(k * p.xi) / n
    pref = 2.0 / (params.c * math.pi)
    g = pref * float(np.sum(mode_kernel(params, n, p.t) * spatial))
    h = pref * float(np.sum(_slow_decay(params, n, p.t) * np.sin(params.c * k * p.t) * spatial))
    return g, h


def remainder_probe(
    params_base: MediumParams,
    p: GreenPoint,
    eps_ladder: Sequence[float],
    t: float | None = None,
    policy: SeriesPolicy = SeriesPolicy(),
    n_modes: int | None = None,
) -> RemainderProbe:
    """Measure ``E(eps) = |G_eps - H|`` at one point along a viscosity ladder.

    Both sides come from their Fourier series; with ``n_modes`` set they
    are cut to exactly that many modes (``n_modes=1`` gives the
    single-mode error in closed form). ``t`` defaults to ``p.t``.

    The fit ``log E = log A + order * log(1 / tau)`` gives the empirical
    order; ``k1 = A / |H|ref`` where ``|H|ref`` is the largest ``|H|``
    over the ladder. Stretched-exponential leftovers
    ``rho2 = E - k1 |H| / tau`` are fitted against ``tau^{1/3}`` when at
    least three of them are positive.
    """
    t = p.t if t is None else t
    point = GreenPoint(p.x, p.xi, t)
    eps_values = tuple(float(e) for e in eps_ladder)
    if len(eps_values) < 2:
        raise DomainError("the ladder needs at least two viscosities")
    taus = tuple(t / e for e in eps_values)
    if any(tau <= 1 for tau in taus):
        raise DomainError("every rung needs tau = t / eps > 1")
    if any(np.diff(taus) <= 0):
        raise DomainError("viscosities must decrease along the ladder")
    errs, hs = [], []
    for eps in eps_values:
        prm = params_base.with_eps(eps)
        if n_modes is None:
            g = green_eps_series(prm, point, policy)
            hv = h_series(prm, point, policy)
        else:
            g, hv = _mode_sum(prm, point, n_modes)
        errs.append(abs(g - hv))
        hs.append(hv)
    e = np.asarray(errs)
    hv = np.abs(np.asarray(hs))
    tau_arr = np.asarray(taus)
    h_ref = float(np.max(hv))
    rho1 = np.where(hv > 0.1 * h_ref, e / np.where(hv > 0, hv, 1.0), np.nan) if h_ref > 0 else np.full(e.shape, np.nan)
    positive = e > 0
    if np.count_nonzero(positive) >= 2:
        order, log_a = np.polyfit(np.log(1.0 / tau_arr[positive]), np.log(e[positive]), 1)
    else:
        order, log_a = math.nan, math.nan
    k1 = math.exp(log_a) / h_ref if h_ref > 0 and np.isfinite(log_a) else math.nan
    rho2 = e - (k1 * hv / tau_arr if np.isfinite(k1) else 0.0)
    lam2 = math.nan
    keep = rho2 > 0
    if np.count_nonzero(keep) >= 3:
        slope, _ = np.polyfit(tau_arr[keep] ** (1.0 / 3.0), np.log(rho2[keep]), 1)
        lam2 = float(-slope)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tuple(float(v) for v in e[:-1] / e[1:])
    return RemainderProbe(
        eps_ladder=eps_values, tau_grid=taus, errors=tuple(e.tolist()), h_values=tuple(hs),
        rho1_estimates=tuple(rho1.tolist()), rho2_estimates=tuple(rho2.tolist()),
        fitted_k1=float(k1), fitted_lambda2=lam2, order=float(order), ratios=ratios,
        details={"h_ref": h_ref, "t": t},
    )
