"""Initial-boundary-value problems on the strip.

The field obeys ``eps u_xxt + c^2 u_xx - u_tt = f`` on ``0 < x < l`` with
``u(0, t) = phi(t)``, ``u(l, t) = psi(t)``, ``u(x, 0) = f0(x)`` and
``u_t(x, 0) = f1(x)``. A linear-in-x lift moves the boundary data into
the source, after which each sine mode is a damped oscillator

    u_n'' + eps mu_n u_n' + c^2 mu_n u_n = -f_n,   mu_n = (n pi / l)^2,

solved exactly for the initial data and by Duhamel quadrature for the
source. A Crank-Nicolson finite-difference integrator, which never looks
at the modes, serves as an independent reference.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse
from scipy.sparse.linalg import splu

from .asymptotic import h_convolution
from .errors import CompatibilityWarning, ConfigurationError, ConvergenceError, DomainError, TruncationWarning
from .modal import MediumParams, SeriesPolicy, _CRIT, _OVER, _UNDER, _kernel, _mode_arrays
from .specfun import DEFAULT_QUADRATURE, QuadratureSpec
from .transform import TimeSignal

__all__ = [
    "ProblemData",
    "ModalCoefficients",
    "FdGrid",
    "FdResult",
    "SOLVER_POLICY",
    "lift_boundary",
    "project",
    "solve_wave",
    "solve_viscous",
    "solve",
    "approx_viscous",
    "fd_reference",
    "single_mode_problem",
]

SOLVER_POLICY = SeriesPolicy(max_modes=256, tail_tol=1e-10)
_DIFF_STEP = 1e-3
_DUHAMEL_ORDER = 16
_GRADING_CAP = 60

ScalarFn = Callable[[np.ndarray], np.ndarray]


def _zero(*args):
    return np.zeros(np.broadcast_shapes(*(np.shape(a) for a in args)))


@dataclass(frozen=True)
class ProblemData:
    """Data of the strip problem. All callables must accept numpy arrays.

    ``f`` is the source as a function of ``(x, t)``; ``None`` means no
    source. ``phi_d``/``phi_dd`` (and the same for ``psi``) are optional
    first and second derivatives of the boundary signals; when missing
    they are taken by finite differences, which samples the signals
    slightly outside the requested times.
    """

    f0: ScalarFn = _zero
    f1: ScalarFn = _zero
    f: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    phi: ScalarFn | None = None
    psi: ScalarFn | None = None
    phi_d: ScalarFn | None = None
    psi_d: ScalarFn | None = None
    phi_dd: ScalarFn | None = None
    psi_dd: ScalarFn | None = None

    @property
    def homogeneous_boundary(self) -> bool:
        return self.phi is None and self.psi is None

    def check_corners(self, params: MediumParams, tol: float = 1e-10) -> None:
        """Warn when initial and boundary displacement disagree at t = 0."""
        ends = np.array([0.0, params.l])
        f0_ends = np.asarray(self.f0(ends), dtype=float)
        phi0 = float(self.phi(np.array(0.0))) if self.phi is not None else 0.0
        psi0 = float(self.psi(np.array(0.0))) if self.psi is not None else 0.0
        if abs(f0_ends[0] - phi0) > tol or abs(f0_ends[1] - psi0) > tol:
            warnings.warn(
                f"corner mismatch: f0(0)={f0_ends[0]:.3g} vs phi(0)={phi0:.3g}, "
                f"f0(l)={f0_ends[1]:.3g} vs psi(0)={psi0:.3g}",
                CompatibilityWarning, stacklevel=2,
            )


@dataclass(frozen=True)
class ModalCoefficients:
    """Sine coefficients of the data: ``g(x) = sum_n g_n sin(n pi x / l)``.

    ``source`` maps an array of times to an ``(n_times, n_max)`` array of
    source coefficients, or is ``None``.
    """

    f0_n: np.ndarray
    f1_n: np.ndarray
    source: Callable[[np.ndarray], np.ndarray] | None
    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not (np.all(np.isfinite(self.f0_n)) and np.all(np.isfinite(self.f1_n))):
            raise DomainError("projection produced non-finite coefficients")


@dataclass(frozen=True)
class FdGrid:
    """Uniform grid for the finite-difference reference.

    ``nx`` counts points including both ends. Crank-Nicolson is the only
    scheme; it is unconditionally stable, but the time step is still held
    to ``c dt nx / l <= 1`` so the time error stays comparable to the
    space error.
    """

    nx: int
    dt: float
    scheme: str = "crank-nicolson"

    def check(self, params: MediumParams) -> None:
        if self.nx < 8:
            raise ConfigurationError("nx must be >= 8")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if self.scheme != "crank-nicolson":
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        courant = params.c * self.dt * self.nx / params.l
        if courant > 1.0 + 1e-12:
            raise ConfigurationError(f"c*dt*nx/l = {courant:.4g} exceeds 1")

    @classmethod
    def matched(cls, params: MediumParams, nx: int) -> "FdGrid":
        """Grid with the largest time step allowed by the Courant bound."""
        return cls(nx, params.l / (params.c * nx))


@dataclass
class FdResult:
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    energy: np.ndarray

    def at(self, times) -> np.ndarray:
        """Rows of ``u`` at the given times, which must be grid times."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        dt = self.t[1] - self.t[0]
        idx = np.rint(times / dt).astype(int)
        if np.any(np.abs(idx * dt - times) > 1e-9 * max(1.0, float(np.max(np.abs(times))))):
            raise DomainError("requested times are not on the time grid")
        if np.any(idx < 0) or np.any(idx >= self.t.size):
            raise DomainError("requested times are outside the integrated range")
        return self.u[idx]


# -- boundary lifting -------------------------------------------------------

def _d1(fn, t, h=_DIFF_STEP):
    return (fn(t - 2 * h) - 8 * fn(t - h) + 8 * fn(t + h) - fn(t + 2 * h)) / (12 * h)


def _d2(fn, t, h=_DIFF_STEP):
    return (-fn(t - 2 * h) + 16 * fn(t - h) - 30 * fn(t) + 16 * fn(t + h) - fn(t + 2 * h)) / (12 * h * h)


def _derivative(fn, supplied, order):
    if fn is None:
        return None
    if supplied is not None:
        return supplied
    rule = _d1 if order == 1 else _d2

    def numeric(t):
        t = np.asarray(t, dtype=float)
        val = np.asarray(rule(fn, t), dtype=float)
        if not np.all(np.isfinite(val)):
            raise DomainError("boundary signal is not differentiable here; supply its derivatives")
        return val
    return numeric


def lift_boundary(data: ProblemData, params: MediumParams):
    """Move the boundary data into the source.

    Returns ``(lifted, lift)`` where ``lifted`` has homogeneous ends and
    ``lift(x, t) = (x/l) psi(t) + ((l - x)/l) phi(t)`` is to be added back.
    The source gains ``(x/l) psi'' + ((l - x)/l) phi''`` and the initial
    data lose ``lift(x, 0)`` and ``lift_t(x, 0)``.
    """
    l = params.l
    if data.homogeneous_boundary:
        return data, _zero
    phi = data.phi or (lambda t: np.zeros(np.shape(t)))
    psi = data.psi or (lambda t: np.zeros(np.shape(t)))
    phi_d = _derivative(data.phi, data.phi_d, 1) or (lambda t: np.zeros(np.shape(t)))
    psi_d = _derivative(data.psi, data.psi_d, 1) or (lambda t: np.zeros(np.shape(t)))
    phi_dd = _derivative(data.phi, data.phi_dd, 2) or (lambda t: np.zeros(np.shape(t)))
    psi_dd = _derivative(data.psi, data.psi_dd, 2) or (lambda t: np.zeros(np.shape(t)))

    def lift(x, t):
        x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
        return (x / l) * psi(t) + ((l - x) / l) * phi(t)

    def f_bar(x, t):
        x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
        base = data.f(x, t) if data.f is not None else 0.0
        return base + (x / l) * psi_dd(t) + ((l - x) / l) * phi_dd(t)

    zero_t = np.array(0.0)

    def f0_bar(x):
        return data.f0(x) - lift(x, zero_t)

    def f1_bar(x):
        x = np.asarray(x, dtype=float)
        return data.f1(x) - ((x / l) * psi_d(zero_t) + ((l - x) / l) * phi_d(zero_t))

    lifted = ProblemData(f0=f0_bar, f1=f1_bar, f=f_bar)
    return lifted, lift


# -- modal synthesis --------------------------------------------------------

def _sine_matrix(params: MediumParams, n_max: int, x: np.ndarray) -> np.ndarray:
    n = np.arange(1, n_max + 1, dtype=float)
    return np.sin(np.multiply.outer(x, n) * math.pi / params.l)


def _warn_slow_decay(name: str, coef: np.ndarray, tol: float) -> None:
    n = np.arange(1, coef.size + 1, dtype=float)
    upper = slice(coef.size // 2, None)
    # envelope from the right, so isolated zeros (parity) do not matter
    tail = np.maximum.accumulate(np.abs(coef)[::-1])[::-1][upper]
    if coef.size >= 8 and np.max(tail) > tol:
        mask = tail > 1e-14 * np.max(np.abs(coef))
        if np.count_nonzero(mask) >= 2:
            slope = np.polyfit(np.log(n[upper][mask]), np.log(tail[mask]), 1)[0]
            if slope > -2.0:
                warnings.warn(
                    f"{name} coefficients decay like n^{slope:.2f}; the truncated series may be inaccurate",
                    TruncationWarning, stacklevel=3,
                )


def project(data: ProblemData, params: MediumParams, policy: SeriesPolicy = SOLVER_POLICY) -> ModalCoefficients:
    """Sine projections by composite Simpson on ``max(4 n_max + 1, 2049)`` points."""
    if not data.homogeneous_boundary:
        raise DomainError("project expects homogeneous boundary data; call lift_boundary first")
    n_max = policy.max_modes
    m = max(4 * n_max + 1, 2049)
    if m % 2 == 0:
        m += 1
    x = np.linspace(0.0, params.l, m)
    # composite Simpson weights h/3 [1, 4, 2, 4, ..., 4, 1], folded into the basis
    w = np.full(m, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= (x[1] - x[0]) / 3.0
    weighted = (2.0 / params.l) * w[:, None] * _sine_matrix(params, n_max, x)

    def coeffs(values):
        return np.broadcast_to(np.asarray(values, dtype=float), x.shape) @ weighted

    f0_n = coeffs(data.f0(x))
    f1_n = coeffs(data.f1(x))
    _warn_slow_decay("f0", f0_n, policy.tail_tol)
    _warn_slow_decay("f1", f1_n, policy.tail_tol)
    source = None
    if data.f is not None:
        def source(times):
            times = np.atleast_1d(np.asarray(times, dtype=float))
            vals = np.asarray(data.f(x[None, :], times[:, None]), dtype=float)
            return np.broadcast_to(vals, (times.size, x.size)) @ weighted
    return ModalCoefficients(f0_n, f1_n, source, n_max)


def _responses(params: MediumParams, n_max: int, t: np.ndarray):
    """Unit-displacement and unit-velocity responses, shape ``t.shape + (n_max,)``."""
    n = np.arange(1, n_max + 1, dtype=float)
    a, decay, omega, r, regime = _mode_arrays(params, n)
    tt = np.asarray(t, dtype=float)[..., None]
    vel = _kernel(a, decay, omega, r, regime, tt) / a
    disp = np.zeros(np.broadcast_shapes(tt.shape, n.shape))
    a_b, d_b, om_b, r_b, reg_b, t_b = np.broadcast_arrays(a, decay, omega, r, regime, tt)
    under = reg_b == _UNDER
    if np.any(under):
        big = a_b[under] * om_b[under]
        ts = t_b[under]
        # d/Omega sin(Omega t) = d t sinc(Omega t / pi), safe as Omega -> 0
        disp[under] = np.exp(-d_b[under] * ts) * (np.cos(big * ts) + d_b[under] * ts * np.sinc(big * ts / math.pi))
    crit = reg_b == _CRIT
    if np.any(crit):
        ts = t_b[crit]
        disp[crit] = np.exp(-d_b[crit] * ts) * (1.0 + d_b[crit] * ts)
    over = reg_b == _OVER
    if np.any(over):
        ts, aa, om, rr = t_b[over], a_b[over], om_b[over], r_b[over]
        slow = -aa / (rr + om)
        fast = -aa * (rr + om)
        disp[over] = ((rr + om) * np.exp(slow * ts) - np.exp(fast * ts) / (rr + om)) / (2.0 * om)
    return disp, vel


def _exponents(params: MediumParams, n_max: int):
    """Per-mode exponents of the velocity response.

    Underdamped modes use ``e^{mu1 s}`` with complex ``mu1``; overdamped
    ones the real pair ``mu1`` (slow) and ``mu2`` (fast); the critical
    mode uses ``e^{mu1 s}`` and ``s e^{mu1 s}``.
    """
    a, decay, omega, r, regime = _mode_arrays(params, np.arange(1, n_max + 1, dtype=float))
    over = regime == _OVER
    mu1 = np.where(regime == _UNDER, -decay + 1j * a * omega, np.where(over, -a / (r + omega), -decay))
    mu2 = np.where(over, -a * (r + omega), -decay).astype(complex)
    return a, omega, regime, mu1.astype(complex), mu2


def _interval_integrals(coef, mu1, mu2, crit, ends, rate, spec):
    """``int e^{mu (hi - s)} f_n(s) ds`` (and ``(hi - s) e^{mu (hi - s)}`` at
    the critical mode) over every interval ``[ends[j], ends[j+1]]``.

    All intervals share one panel-doubling loop so the source is sampled
    in large batches; converged intervals drop out.
    """
    n_max = coef.n_max
    count = ends.size - 1
    first = np.zeros((count, n_max), dtype=complex)
    second = np.zeros((count, n_max), dtype=complex)
    segments = []  # per interval: edges graded toward its right end
    for lo, hi in zip(ends[:-1], ends[1:]):
        step = hi - lo
        levels = min(_GRADING_CAP, math.ceil(math.log2(step * rate))) if step * rate > 2.0 else 0
        segments.append(np.concatenate([[lo], hi - step * 2.0 ** -np.arange(1, levels + 1), [hi]]))
    base_x, base_w = leggauss(_DUHAMEL_ORDER)
    chunk = max(_DUHAMEL_ORDER, 1_000_000 // max(n_max, 1))

    def estimate(active, panels):
        nodes, weights, owner = [], [], []
        for j in active:
            e = segments[j]
            fine = (e[:-1, None] + (e[1:] - e[:-1])[:, None] * np.arange(panels + 1)[None, :] / panels)
            lo, hi = fine[:, :-1].ravel(), fine[:, 1:].ravel()
            half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
            nodes.append((mid[:, None] + half[:, None] * base_x).ravel())
            weights.append((half[:, None] * base_w).ravel())
            owner.append(np.full(nodes[-1].size, j))
        s, w, own = np.concatenate(nodes), np.concatenate(weights), np.concatenate(owner)
        res1 = np.zeros((count, n_max), dtype=complex)
        res2 = np.zeros((count, n_max), dtype=complex)
        for start in range(0, s.size, chunk):
            sl = slice(start, start + chunk)
            lag = (ends[own[sl] + 1] - s[sl])[:, None]
            f_n = coef.source(s[sl]) * w[sl, None]
            b1 = np.exp(lag * mu1) * f_n
            b2 = np.where(crit, lag * b1, np.exp(lag * mu2) * f_n)
            # owners are contiguous, so per-interval sums are segment sums
            who, first_at = np.unique(own[sl], return_index=True)
            res1[who] += np.add.reduceat(b1, first_at, axis=0)
            res2[who] += np.add.reduceat(b2, first_at, axis=0)
        return res1, res2

    active = np.nonzero(ends[1:] > ends[:-1])[0]
    if active.size == 0:
        return first, second
    panels = 1
    prev1, prev2 = estimate(active, panels)
    while active.size:
        panels *= 2
        if panels > spec.max_subdivisions:
            raise ConvergenceError("Duhamel quadrature hit its panel cap", estimate=prev1[active])
        cur1, cur2 = estimate(active, panels)
        diff = np.maximum(np.max(np.abs(cur1 - prev1), axis=1), np.max(np.abs(cur2 - prev2), axis=1))[active]
        scale = np.maximum(np.max(np.abs(cur1), axis=1), np.max(np.abs(cur2), axis=1))[active]
        done = diff <= np.maximum(spec.abs_tol, spec.rel_tol * scale)
        first[active[done]] = cur1[active[done]]
        second[active[done]] = cur2[active[done]]
        active = active[~done]
        prev1, prev2 = cur1, cur2
    return first, second


def _duhamel(params: MediumParams, coef: ModalCoefficients, times: np.ndarray,
             spec: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """``int_0^t vel(t - s) f_n(s) ds`` for every output time.

    The velocity response is a combination of exponentials, so the
    integrals are carried from one sorted output time to the next by
    exact propagation and only the new interval is integrated: by
    panel-doubling Gauss-Legendre, with breakpoints graded toward its
    right end down to the time scale of the fastest decaying mode.
    """
    n_max = coef.n_max
    a, omega, regime, mu1, mu2 = _exponents(params, n_max)
    crit = regime == _CRIT
    under = regime == _UNDER
    over = regime == _OVER
    rate = float(np.max(-np.concatenate([mu1.real, mu2.real])))
    order = np.argsort(times)
    ends = np.concatenate([[0.0], np.asarray(times, dtype=float)[order]])
    first_loc, second_loc = _interval_integrals(coef, mu1, mu2, crit, ends, rate, spec)
    first = np.zeros(n_max, dtype=complex)
    second = np.zeros(n_max, dtype=complex)
    out = np.zeros((times.size, n_max))
    for j, idx in enumerate(order):
        step = ends[j + 1] - ends[j]
        if step > 0:
            e1, e2 = np.exp(mu1 * step), np.exp(mu2 * step)
            second = np.where(crit, e1 * (second + step * first), e2 * second) + second_loc[j]
            first = e1 * first + first_loc[j]
        vel = np.zeros(n_max)
        vel[under] = first[under].imag / (a[under] * omega[under])
        vel[over] = (first[over] - second[over]).real / (2.0 * a[over] * omega[over])
        vel[crit] = second[crit].real
        out[idx] = vel
    return out


def _synthesize(params, data, x, t, policy):
    if not data.homogeneous_boundary:
        raise DomainError("apply lift_boundary first (or call solve)")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(x < 0) or np.any(x > params.l):
        raise DomainError("x must lie in [0, l]")
    coef = project(data, params, policy)
    if coef.source is not None and np.any(t < 0):
        raise DomainError("negative times are only defined without a source")
    disp, vel = _responses(params, coef.n_max, t)
    modal = disp * coef.f0_n + vel * coef.f1_n
    if coef.source is not None:
        modal = modal - _duhamel(params, coef, t)
    return modal @ _sine_matrix(params, coef.n_max, x).T


def solve_wave(data: ProblemData, params: MediumParams, x, t, policy: SeriesPolicy = SOLVER_POLICY) -> np.ndarray:
    """Pure-wave field on the grid ``t x x`` (rows are times).

    Without a source the modes are evolved freely, so negative times are
    allowed and give the backward evolution.
    """
    return _synthesize(params.with_eps(0.0), data, x, t, policy)


def solve_viscous(data: ProblemData, params: MediumParams, x, t, policy: SeriesPolicy = SOLVER_POLICY) -> np.ndarray:
    """Viscous field on the grid ``t x x``. Requires ``eps > 0``."""
    if params.eps <= 0:
        raise DomainError("solve_viscous needs eps > 0; use solve_wave")
    return _synthesize(params, data, x, t, policy)


def solve(data: ProblemData, params: MediumParams, x, t, policy: SeriesPolicy = SOLVER_POLICY) -> np.ndarray:
    """Lift the boundary data, solve (wave or viscous by ``eps``), add the lift back."""
    data.check_corners(params)
    lifted, lift = lift_boundary(data, params)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if params.eps > 0:
        field_ = solve_viscous(lifted, params, x, t, policy)
    else:
        field_ = solve_wave(lifted, params, x, t, policy)
    return field_ + lift(x[None, :], t[:, None])


def approx_viscous(
    data: ProblemData,
    params: MediumParams,
    x,
    t,
    policy: SeriesPolicy = SOLVER_POLICY,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """Slow-time approximation: Gaussian time average of the wave solution.

    Per mode the average reproduces the response to initial velocity and
    to sources up to O(eps^2) at fixed ``t``. The response to initial
    displacement carries an extra ``(decay / frequency) sin`` term of
    order ``eps`` that the average does not see, so there the error is
    O(eps).

    Before ``t = 0`` the wave field is continued by free evolution with the
    source switched off. Rows with ``t <= eps`` are outside the regime of
    the approximation and are returned as NaN.
    """
    if params.eps <= 0:
        raise DomainError("approx_viscous needs eps > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    free = replace(data, f=None)
    wave = TimeSignal(lambda s: solve_wave(data, params, x, np.maximum(s, 0.0), policy))
    out = np.full((t.size, x.size), np.nan)
    for j, tj in enumerate(t):
        if tj <= params.eps:
            continue
        out[j] = h_convolution(
            wave, params, float(tj), spec,
            extension=lambda s: solve_wave(free, params, x, s, policy),
        )
    return out


def single_mode_problem(params: MediumParams) -> ProblemData:
    """Initial velocity ``(c pi / l) sin(pi x / l)``, everything else zero.

    The pure-wave solution is ``sin(pi x / l) sin(pi c t / l)``.
    """
    k = math.pi / params.l
    return ProblemData(f1=lambda x: params.c * k * np.sin(k * np.asarray(x, dtype=float)))


# -- finite-difference reference -------------------------------------------

def fd_reference(data: ProblemData, params: MediumParams, grid: FdGrid, horizon: float) -> FdResult:
    """Crank-Nicolson integration of ``u_t = w``, ``w_t = c^2 u_xx + eps w_xx - f``.

    Second-order central differences in space, trapezoidal averaging in
    time, Dirichlet values imposed directly (no lifting). The discrete
    energy ``(|w|^2 + c^2 <-A u, u>) dx / 2`` is returned per step; with
    homogeneous ends and no source it cannot increase.
    """
    grid.check(params)
    if not horizon > 0:
        raise ConfigurationError("horizon must be positive")
    c2, eps = params.c**2, params.eps
    nx = grid.nx
    dx = params.l / (nx - 1)
    steps = int(math.ceil(horizon / grid.dt - 1e-9))
    dt = grid.dt
    x = np.linspace(0.0, params.l, nx)
    xi = x[1:-1]
    m = nx - 2

    lap = sparse.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1], format="csc") / dx**2
    eye = sparse.identity(m, format="csc")
    half = 0.5 * dt
    lhs = sparse.bmat([[eye, -half * eye], [-half * c2 * lap, eye - half * eps * lap]], format="csc")
    rhs_op = sparse.bmat([[eye, half * eye], [half * c2 * lap, eye + half * eps * lap]], format="csr")
    solver = splu(lhs)

    zero_fn = lambda s: np.zeros(np.shape(s))  # noqa: E731
    phi = data.phi or zero_fn
    psi = data.psi or zero_fn
    phi_d = _derivative(data.phi, data.phi_d, 1) or zero_fn
    psi_d = _derivative(data.psi, data.psi_d, 1) or zero_fn

    def forcing(tn):
        # boundary values enter through the end rows of the Laplacian
        g = np.zeros(m)
        if data.f is not None:
            g -= np.asarray(data.f(xi, np.full(m, tn)), dtype=float)
        tn_arr = np.array(tn)
        g[0] += (c2 * float(phi(tn_arr)) + eps * float(phi_d(tn_arr))) / dx**2
        g[-1] += (c2 * float(psi(tn_arr)) + eps * float(psi_d(tn_arr))) / dx**2
        return g

    def energy(u_in, w_in):
        u_full = np.concatenate([[0.0], u_in, [0.0]])
        grad = np.diff(u_full) / dx
        return 0.5 * dx * (float(w_in @ w_in) + c2 * float(grad @ grad))

    u = np.asarray(data.f0(xi), dtype=float) * np.ones(m)
    w = np.asarray(data.f1(xi), dtype=float) * np.ones(m)
    times = dt * np.arange(steps + 1)
    field_ = np.empty((steps + 1, nx))
    energies = np.empty(steps + 1)

    def store(k, u_in, w_in, tn):
        field_[k, 0] = float(phi(np.array(tn)))
        field_[k, -1] = float(psi(np.array(tn)))
        field_[k, 1:-1] = u_in
        energies[k] = energy(u_in, w_in)

    store(0, u, w, 0.0)
    g_old = forcing(0.0)
    for k in range(1, steps + 1):
        tn = times[k]
        g_new = forcing(tn)
        rhs = rhs_op @ np.concatenate([u, w])
        rhs[m:] += half * (g_old + g_new)
        state = solver.solve(rhs)
        u, w = state[:m], state[m:]
        store(k, u, w, tn)
        g_old = g_new
    return FdResult(x, times, field_, energies)
