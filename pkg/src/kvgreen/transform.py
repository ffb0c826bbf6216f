"""Bessel-kernel transform from pure-wave signals to viscous ones.

For ``eps > 0`` and ``tau = t / eps`` the viscous response is

    G_eps(t) = (c^3 tau^{3/2} / sqrt(pi)) * iint_{U, V >= 0}
               G0(t U) I0(2 c^2 tau sqrt(U V)) exp(-c^2 tau [1 + (U + V)^2 / 4]) dU dV.

Writing ``I0(z) = e^z * i0e(z)`` folds every exponential into
``exp(-c^2 tau h(U, V))`` with

    h = 1 + (U + V)^2 / 4 - 2 sqrt(U V)
      = [(U-1)^2 + (V-1)^2 + (p-1)^2 (q+1)^2 + (q-1)^2 (p+1)^2] / 4,

where ``p = sqrt(U)``, ``q = sqrt(V)``. The sum-of-squares form is never
negative in floating point, so no positive number is ever exponentiated.
Integrating in ``(p, q)`` instead of ``(U, V)`` removes the square-root
behaviour of ``sqrt(U V)`` at the axes. Because the signal depends on
``U`` alone, the ``q`` integral is a signal-independent kernel ``K(p)``.

The bound ``h >= [(U-1)^2 + (V-1)^2] / 4`` certifies the truncation of
the quarter plane to a square window around ``(1, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .checks import IdentityReport, relative_deviation
from .errors import DomainError
from .modal import MediumParams, SeriesPolicy, _image_sources
from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    bessel_i0,
    bessel_i0_scaled,
    gauss_legendre,
    integrate_finite,
    integrate_semi_infinite,
    integrate_vectorized,
)

__all__ = [
    "TimeSignal",
    "WindowSpec",
    "TransformResult",
    "WindowTailReport",
    "h_function",
    "h_lower_bound",
    "kv_transform",
    "sine_signal",
    "constant_signal",
    "mode_signal",
    "green_wave_signal",
    "verify_identity_32",
    "verify_identity_34",
    "verify_identity_38",
    "gamma_window_tail",
]

# Extra log-margin on top of the tail threshold when sizing the window;
# covers the window area and the Jacobian 4pq.
_WINDOW_MARGIN = 5.0
_INNER_ORDER = 32
_INNER_PANELS = 16


@dataclass(frozen=True)
class TimeSignal:
    """A scalar function of time handed to the transform.

    Attributes
    ----------
    eval : callable
        Vectorized map from an array of times to values. Extra trailing
        axes (a spatial grid, say) are carried through the transform.
    validity : (float, float)
        Interval of times on which ``eval`` is trustworthy.
    smoothness_hint : {"smooth", "piecewise-smooth"}
        Piecewise-smooth signals should list their kinks or jumps in
        ``breakpoints`` so quadrature can split there.
    breakpoints : tuple of float, or callable
        Times where the signal or its derivatives jump. A callable
        ``(lo, hi) -> times`` serves signals with infinitely many jumps.
    bound : float or None
        Upper bound on ``|eval|``; sampled when missing. Used only to
        size the truncation window.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    validity: tuple[float, float] = (0.0, math.inf)
    smoothness_hint: Literal["smooth", "piecewise-smooth"] = "smooth"
    breakpoints: tuple[float, ...] | Callable[[float, float], Sequence[float]] = ()
    bound: float | None = None

    def __post_init__(self):
        lo, hi = self.validity
        if not (0.0 <= lo < hi):
            raise DomainError("validity must be an interval [lo, hi) with 0 <= lo < hi")
        if self.smoothness_hint not in ("smooth", "piecewise-smooth"):
            raise ValueError("smoothness_hint must be 'smooth' or 'piecewise-smooth'")
        if self.bound is not None and not self.bound >= 0:
            raise ValueError("bound must be non-negative")

    def __call__(self, times) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(times, dtype=float)), dtype=float)

    def breaks(self, lo: float, hi: float) -> list[float]:
        """Breakpoints inside ``(lo, hi)``."""
        pts = self.breakpoints(lo, hi) if callable(self.breakpoints) else self.breakpoints
        return sorted(float(b) for b in pts if lo < b < hi)

    def estimated_bound(self, t_max: float) -> float:
        if self.bound is not None:
            return self.bound
        hi = min(t_max, self.validity[1])
        grid = np.linspace(self.validity[0], hi, 2049)
        return float(np.max(np.abs(self(grid))))


@dataclass(frozen=True)
class WindowSpec:
    """Shrinking window ``[1 - chi, 1 + chi] x [1 - sigma, 1 + sigma]``
    with ``chi = chi0 tau^{-1/3}`` and ``sigma = sigma0 tau^{-1/3}``."""

    chi0: float = 0.5
    sigma0: float = 0.5

    def __post_init__(self):
        # the half-widths must stay below 1 for every tau > 1
        if not (0.0 < self.chi0 <= 1.0 and 0.0 < self.sigma0 <= 1.0):
            raise DomainError("window constants must lie in (0, 1]")

    def half_widths(self, tau: float) -> tuple[float, float]:
        scale = tau ** (-1.0 / 3.0)
        return self.chi0 * scale, self.sigma0 * scale


@dataclass
class TransformResult:
    value: float | np.ndarray
    error: float
    tau: float
    window: tuple[float, float]
    signal_bound: float
    min_exponent_margin: float
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class WindowTailReport:
    """Mass of the integrand bound outside the shrinking window.

    ``tail`` is the value at the requested ``tau``; ``taus``/``tails`` is
    the sweep behind the fit ``log(tail) = log(mu) - lambda_sq tau^{1/3}``.
    """

    tau: float
    tail: float
    taus: tuple[float, ...]
    tails: tuple[float, ...]
    mu: float
    lambda_sq: float
    slope: float
    r_squared: float


def h_function(p, q):
    """Exponent ``h`` in sum-of-squares form, in the root variables ``p, q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.25 * (
        (p * p - 1.0) ** 2 + (q * q - 1.0) ** 2
        + (p - 1.0) ** 2 * (q + 1.0) ** 2 + (q - 1.0) ** 2 * (p + 1.0) ** 2
    )


def h_lower_bound(p, q):
    """Gaussian minorant ``[(U-1)^2 + (V-1)^2] / 4`` of ``h``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.25 * ((p * p - 1.0) ** 2 + (q * q - 1.0) ** 2)


def _prefactor(c: float, tau: float) -> float:
    return c**3 * tau**1.5 / math.sqrt(math.pi)


def _window_radius(c: float, tau: float, bound: float, spec: QuadratureSpec) -> float:
    level = math.log(max(bound, 1e-300) * _prefactor(c, tau)) - spec.tail_cut_log + _WINDOW_MARGIN
    return math.sqrt(4.0 * max(level, 1.0) / (c * c * tau))


def _root_range(radius: float) -> tuple[float, float]:
    return math.sqrt(max(0.0, 1.0 - radius)), math.sqrt(1.0 + radius)


def _kernel(p: np.ndarray, c: float, tau: float, q_nodes: np.ndarray, q_weights: np.ndarray):
    """``K(p) = pref * int 4 p q i0e(2 c^2 tau p q) exp(-c^2 tau h) dq``.

    Also returns the smallest ``h - h_lower_bound`` seen at the nodes.
    """
    out = np.empty_like(p)
    margin = math.inf
    pref = _prefactor(c, tau)
    chunk = max(1, 200_000 // q_nodes.size)
    for start in range(0, p.size, chunk):
        pp = p[start:start + chunk, None]
        qq = q_nodes[None, :]
        h = h_function(pp, qq)
        margin = min(margin, float(np.min(h - h_lower_bound(pp, qq))))
        z = 2.0 * c * c * tau * pp * qq
        vals = 4.0 * pp * qq * bessel_i0_scaled(z) * np.exp(-c * c * tau * h)
        out[start:start + chunk] = pref * (vals @ q_weights)
    return out, margin


def kv_transform(
    signal: TimeSignal,
    params: MediumParams,
    t: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    full_output: bool = False,
):
    """Map a pure-wave signal ``G0(.)`` to its viscous counterpart at time ``t``.

    Parameters
    ----------
    signal : TimeSignal
        Pure-wave response, needed on ``[0, t (1 + R)]`` where ``R`` is
        the truncation radius (a few units of ``1 / (c sqrt(tau))``).
    params : MediumParams
        Must have ``eps > 0``; at ``eps = 0`` the map is the identity.
    t : float
        Physical time, ``> 0``.
    spec : QuadratureSpec
        Tolerances for the outer integral and the truncation threshold.
    full_output : bool
        Return a :class:`TransformResult` with diagnostics instead of the
        bare value.

    Raises
    ------
    DomainError
        For ``eps = 0``, ``t <= 0`` or a signal whose validity interval is
        too short.
    ConvergenceError
        When the outer quadrature hits its panel cap.
    """
    if params.eps <= 0:
        raise DomainError("kv_transform needs eps > 0; at eps = 0 the signal is its own image")
    if not t > 0:
        raise DomainError("t must be positive")
    c = params.c
    tau = t / params.eps
    bound = signal.estimated_bound(t * (1.0 + _window_radius(c, tau, 1.0, spec)))
    if bound == 0.0:
        zero = np.zeros(np.shape(signal(np.array([t])))[1:])
        value = float(zero) if zero.ndim == 0 else zero
        if full_output:
            return TransformResult(value, 0.0, tau, (1.0, 1.0), 0.0, 0.0)
        return value
    radius = _window_radius(c, tau, bound, spec)
    p_lo, p_hi = _root_range(radius)
    needed = t * p_hi * p_hi
    if signal.validity[0] > t * p_lo * p_lo or signal.validity[1] < needed:
        raise DomainError(
            f"signal must be valid on [{t * p_lo * p_lo:.6g}, {needed:.6g}]"
        )

    q_nodes, q_weights = gauss_legendre(p_lo, p_hi, _INNER_ORDER, _INNER_PANELS)
    margins = []

    def integrand(p):
        k, margin = _kernel(p, c, tau, q_nodes, q_weights)
        margins.append(margin)
        vals = signal(t * p * p)
        if not np.all(np.isfinite(vals)):
            raise DomainError("signal returned non-finite values inside its validity interval")
        return k.reshape(k.shape + (1,) * (vals.ndim - 1)) * vals

    cuts = [math.sqrt(b / t) for b in signal.breaks(t * p_lo * p_lo, needed)]
    result = integrate_vectorized(integrand, p_lo, p_hi, spec, breakpoints=cuts)
    if not full_output:
        return result.value
    return TransformResult(
        value=result.value,
        error=result.error,
        tau=tau,
        window=(p_lo * p_lo, p_hi * p_hi),
        signal_bound=bound,
        min_exponent_margin=min(margins),
        details={"breakpoints": cuts},
    )


# -- signal constructors ----------------------------------------------------

def sine_signal(freq: float, amplitude: float = 1.0) -> TimeSignal:
    return TimeSignal(lambda u: amplitude * np.sin(freq * u), bound=abs(amplitude))


def constant_signal(value: float) -> TimeSignal:
    return TimeSignal(lambda u: np.full(np.shape(u), float(value)), bound=abs(value))


def mode_signal(params: MediumParams, n: int) -> TimeSignal:
    """Undamped mode ``sin(pi c n u / l)``; its image is the damped mode."""
    return sine_signal(math.pi * params.c * n / params.l)


def green_wave_signal(
    params: MediumParams,
    x: float,
    xi: float,
    t_max: float = math.inf,
    backend: Literal["images", "series"] = "images",
    policy: SeriesPolicy = SeriesPolicy(max_modes=200),
) -> TimeSignal:
    """Time slice ``u -> G0(x, xi, u)`` of the pure-wave Green function.

    The images backend is exact and piecewise constant; its jump times
    are reported as breakpoints. The series backend is the partial
    Fourier sum with ``policy.max_modes`` terms; it is smooth, and its
    transform is the same partial sum of the viscous series. ``t_max``
    only narrows the validity interval.
    """
    if not (0.0 <= x <= params.l and 0.0 <= xi <= params.l):
        raise DomainError("x and xi must lie in [0, l]")
    c, l = params.c, params.l
    if backend == "images":
        def distances(horizon):
            positive, negative = _image_sources(params, xi, horizon)
            return np.abs(x - positive) / c, np.abs(x - negative) / c

        def g0(u):
            u = np.asarray(u, dtype=float)
            d_pos, d_neg = distances(float(np.max(u)) if u.size else 0.0)
            step_pos = 0.5 + 0.5 * np.sign(u[..., None] - d_pos)
            step_neg = 0.5 + 0.5 * np.sign(u[..., None] - d_neg)
            return (step_pos.sum(-1) - step_neg.sum(-1)) / (2.0 * c)

        def jumps(lo, hi):
            return np.concatenate(distances(hi)).tolist()

        return TimeSignal(g0, (0.0, t_max), "piecewise-smooth", jumps, 1.0 / (2.0 * c))
    if backend == "series":
        n = np.arange(1, policy.max_modes + 1, dtype=float)
        spatial = np.sin(math.pi * n * x / l) * np.sin(math.pi * n * xi / l) / n
        freq = math.pi * c * n / l

        def g0s(u):
            u = np.asarray(u, dtype=float)
            return 2.0 / (c * math.pi) * (np.sin(np.multiply.outer(u, freq)) @ spatial)

        return TimeSignal(g0s, (0.0, t_max), bound=2.0 / (c * math.pi) * float(np.sum(np.abs(spatial))))
    raise ValueError(f"unknown backend {backend!r}")


# -- closed-form identities -------------------------------------------------

def verify_identity_32(
    params: MediumParams, v: float, s: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> IdentityReport:
    """Laplace transform of the Gaussian kernel.

    Checks ``int_0^inf e^{-s t} e^{-c^2 t/eps} / sqrt(pi eps t)
    e^{-c^2 v^2 / (4 eps t)} dt = exp(-(c/eps) sqrt(eps s + c^2) v) / sqrt(eps s + c^2)``.
    The substitution ``t = w^2`` removes the endpoint singularity.
    """
    c, eps = params.c, params.eps
    if eps <= 0:
        raise DomainError("identity needs eps > 0")
    d = eps * s + c * c
    if d <= 0:
        raise DomainError("eps*s + c^2 must be positive")
    rate = s + c * c / eps
    scale = 2.0 / math.sqrt(math.pi * eps)
    far = c * c * v * v / (4.0 * eps)

    def f(w):
        if w == 0.0:
            return scale if v == 0 else 0.0
        return scale * math.exp(-rate * w * w - far / (w * w))

    lhs = integrate_semi_infinite(f, 0.0, spec, lambda w: math.log(scale) - rate * w * w).value
    rhs = math.exp(-(c / eps) * math.sqrt(d) * v) / math.sqrt(d)
    return IdentityReport("gaussian_laplace", lhs, rhs, relative_deviation(lhs, rhs), {"v": v, "s": s})


def verify_identity_34(
    params: MediumParams, u: float, s: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> IdentityReport:
    """Bessel-Laplace identity
    ``int_0^inf e^{-lam v} I0(beta sqrt(u v)) dv = (eps/c) exp(c^3 u / (eps sqrt(D))) / sqrt(D)``
    with ``D = eps s + c^2``, ``lam = (c/eps) sqrt(D)``, ``beta = 2 c^2 / eps``.
    """
    c, eps = params.c, params.eps
    if eps <= 0:
        raise DomainError("identity needs eps > 0")
    if u < 0:
        raise DomainError("u must be non-negative")
    d = eps * s + c * c
    if d <= 0:
        raise DomainError("eps*s + c^2 must be positive")
    lam = (c / eps) * math.sqrt(d)
    beta = 2.0 * c * c / eps

    def f(v):
        z = beta * math.sqrt(u * v)
        return bessel_i0_scaled(z) * math.exp(z - lam * v)

    def envelope(v):
        return beta * math.sqrt(u * v) - lam * v

    # the integrand peaks where sqrt(v) = beta sqrt(u) / (2 lam)
    peak = (beta * math.sqrt(u) / (2.0 * lam)) ** 2
    head = integrate_finite(f, 0.0, 2.0 * peak, spec).value if peak > 0 else 0.0
    tail = integrate_semi_infinite(f, 2.0 * peak, spec, envelope).value
    lhs = head + tail
    rhs = (eps / c) * math.exp(c**3 * u / (eps * math.sqrt(d))) / math.sqrt(d)
    return IdentityReport("bessel_laplace", lhs, rhs, relative_deviation(lhs, rhs), {"u": u, "s": s})


def verify_identity_38(
    a: float, b: float, v: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> IdentityReport:
    """Sine-Bessel identity
    ``int_0^{2v} sin(a y) I0(b sqrt(y (2v - y))) dy = 2 sin(a v) S(v) ``
    with ``S = sin(v r)/r``, ``r = sqrt(a^2 - b^2)`` for ``a > b``, the
    limit ``v`` for ``a = b`` and ``sinh(v r)/r``, ``r = sqrt(b^2 - a^2)``
    for ``a < b``.
    """
    if a <= 0 or b < 0 or v < 0:
        raise DomainError("need a > 0, b >= 0, v >= 0")

    def f(y):
        return math.sin(a * y) * bessel_i0(b * math.sqrt(max(y * (2.0 * v - y), 0.0)))

    lhs = integrate_finite(f, 0.0, 2.0 * v, spec).value
    if a > b:
        r = math.sqrt(a * a - b * b)
        shape = math.sin(v * r) / r
    elif a < b:
        r = math.sqrt(b * b - a * a)
        shape = math.sinh(v * r) / r
    else:
        shape = v
    rhs = 2.0 * math.sin(a * v) * shape
    return IdentityReport("sine_bessel", lhs, rhs, relative_deviation(lhs, rhs), {"a": a, "b": b, "v": v})


# -- window tail ------------------------------------------------------------

def _rect_mass(c, tau, u_lo, u_hi, v_lo, v_hi, bound, order=48, panels=16):
    if u_hi <= u_lo or v_hi <= v_lo:
        return 0.0
    pp, wp = gauss_legendre(math.sqrt(u_lo), math.sqrt(u_hi), order, panels)
    qq, wq = gauss_legendre(math.sqrt(v_lo), math.sqrt(v_hi), order, panels)
    p, q = pp[:, None], qq[None, :]
    vals = 4.0 * p * q * bessel_i0_scaled(2.0 * c * c * tau * p * q) * np.exp(-c * c * tau * h_function(p, q))
    return bound * _prefactor(c, tau) * float(wp @ vals @ wq)


def _tail_mass(c, tau, window, bound, spec):
    chi, sig = window.half_widths(tau)
    top = 1.0 + _window_radius(c, tau, bound, spec)
    return (
        _rect_mass(c, tau, 0.0, 1.0 - chi, 0.0, top, bound)
        + _rect_mass(c, tau, 1.0 + chi, top, 0.0, top, bound)
        + _rect_mass(c, tau, 1.0 - chi, 1.0 + chi, 0.0, 1.0 - sig, bound)
        + _rect_mass(c, tau, 1.0 - chi, 1.0 + chi, 1.0 + sig, top, bound)
    )


def gamma_window_tail(
    params: MediumParams,
    t: float,
    window: WindowSpec = WindowSpec(),
    bound: float = 1.0,
    sweep: Sequence[float] = (8.0, 27.0, 64.0, 125.0),
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> WindowTailReport:
    """Integrate the integrand envelope over the complement of the window.

    The signal is replaced by its bound ``|G0| <= bound``, so the result
    bounds the truncation error of restricting the transform to the
    window. The same computation over ``sweep`` yields a least-squares fit
    of ``log(tail)`` against ``tau^{1/3}``.
    """
    if params.eps <= 0:
        raise DomainError("window tail needs eps > 0")
    tau = t / params.eps
    if tau <= 1 or any(s <= 1 for s in sweep):
        raise DomainError("window tail needs tau > 1")
    if len(sweep) < 3:
        raise DomainError("the regression needs at least three sweep points")
    c = params.c
    tail = _tail_mass(c, tau, window, bound, spec)
    tails = np.array([_tail_mass(c, s, window, bound, spec) for s in sweep])
    x = np.asarray(sweep, dtype=float) ** (1.0 / 3.0)
    y = np.log(tails)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return WindowTailReport(
        tau=tau, tail=tail, taus=tuple(float(s) for s in sweep), tails=tuple(tails.tolist()),
        mu=float(math.exp(intercept)), lambda_sq=float(-slope), slope=float(slope), r_squared=r2,
    )
