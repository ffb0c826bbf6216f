"""Special functions and quadrature engines.

Everything downstream leans on three primitives: the modified Bessel
function I0 (plain and exponentially scaled), the Jacobi theta function
theta_3, and integration over finite and semi-infinite intervals.

The scaled Bessel function is what keeps the Bessel-kernel transform
stable: I0(z) grows like e^z, so the transform combines e^{-z} I0(z) with
the surrounding Gaussian exponents and never exponentiates a positive
number.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .errors import ConvergenceError, DomainError, TruncationError

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "DEFAULT_QUADRATURE",
    "bessel_i0",
    "bessel_i0_scaled",
    "theta3",
    "integrate_finite",
    "integrate_semi_infinite",
    "integrate_vectorized",
    "gauss_legendre",
]

# Power series below the switch, asymptotic expansion above it. Both reach
# full double precision at the seam (checked in tests/test_specfun.py).
Z_SWITCH = 20.0
_SERIES_TERMS = 64
_ASYMPTOTIC_TERMS = 36


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation policy for every integral in the package.

    Attributes
    ----------
    abs_tol, rel_tol : float
        Target error is ``max(abs_tol, rel_tol * |result|)``.
    max_subdivisions : int
        Cap on adaptive subdivisions (panels per segment for the
        vectorized rule, interval count for the scalar one).
    tail_cut_log : float
        Natural-log threshold below which a decay envelope counts as
        negligible when truncating infinite ranges.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 512
    tail_cut_log: float = math.log(1e-16)

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("abs_tol and rel_tol cannot both be zero")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def target(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * float(np.max(np.abs(value))))


DEFAULT_QUADRATURE = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float | np.ndarray
    error: float


def _as_domain(z, name="z") -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError(f"{name} must be finite")
    if np.any(z < 0):
        raise DomainError(f"{name} must be non-negative")
    return z


def _i0_series(z: np.ndarray) -> np.ndarray:
    # sum_k (z/2)^{2k} / (k!)^2, all terms positive so no cancellation
    x = 0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, _SERIES_TERMS):
        term = term * x / (k * k)
        total = total + term
    return total


def _i0_asymptotic_scaled(z: np.ndarray) -> np.ndarray:
    # e^{-z} I0(z) = (2 pi z)^{-1/2} sum_k ((2k-1)!!)^2 / (k! 8^k z^k)
    inv = 1.0 / z
    coeff = 1.0
    power = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, _ASYMPTOTIC_TERMS):
        coeff *= (2 * k - 1) ** 2 / (8.0 * k)
        power = power * inv
        total = total + coeff * power
    return total / np.sqrt(2.0 * np.pi * z)


def _scalar_or_array(out: np.ndarray):
    return float(out) if out.ndim == 0 else out


def bessel_i0_scaled(z):
    """Exponentially scaled modified Bessel function ``e^{-z} I0(z)``.

    Finite for every representable ``z >= 0``; the asymptotic branch works
    on the scaled form directly, so ``bessel_i0_scaled(700.0)`` is about
    0.01508 even though ``I0(700)`` overflows.

    Raises
    ------
    DomainError
        If any ``z`` is negative or non-finite.
    """
    z = _as_domain(z)
    out = np.empty_like(z)
    small = z <= Z_SWITCH
    if np.any(small):
        zs = z[small]
        out[small] = np.exp(-zs) * _i0_series(zs)
    if np.any(~small):
        out[~small] = _i0_asymptotic_scaled(z[~small])
    return _scalar_or_array(out)


def bessel_i0(z):
    """Modified Bessel function of the first kind, order zero."""
    z = _as_domain(z)
    out = np.empty_like(z)
    small = z <= Z_SWITCH
    if np.any(small):
        out[small] = _i0_series(z[small])
    if np.any(~small):
        zl = z[~small]
        with np.errstate(over="ignore"):
            out[~small] = np.exp(zl) * _i0_asymptotic_scaled(zl)
    return _scalar_or_array(out)


def theta3(u, q_param: float, tail_tol: float = 1e-17):
    """Jacobi theta function ``1 + 2 sum_{n>=1} q^{n^2} cos(2 pi n u)``.

    The nome ``q_param`` enters directly. This convention makes the
    function 1-periodic and even in ``u``; the heat kernel on a strip of
    length ``l`` at diffusion time ``theta`` is
    ``theta3((y - xi) / (2 l), exp(-pi**2 * theta / l**2)) / (2 l)``.
    """
    if not 0.0 < q_param < 1.0:
        raise DomainError("theta3 nome must lie in (0, 1)")
    u = np.asarray(u, dtype=float)
    logq = math.log(q_param)
    n_max = max(1, math.ceil(math.sqrt(math.log(tail_tol) / logq)))
    n = np.arange(1, n_max + 1, dtype=float)
    weights = np.exp(n * n * logq)
    phases = 2.0 * np.pi * np.multiply.outer(u, n)
    out = 1.0 + 2.0 * np.sum(weights * np.cos(phases), axis=-1)
    return _scalar_or_array(np.asarray(out))


def integrate_finite(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    points: Sequence[float] | None = None,
) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of a scalar function over ``[a, b]``.

    Raises
    ------
    ConvergenceError
        When the subdivision cap is hit; the exception carries the best
        estimate.
    """
    if b < a:
        raise DomainError("integrate_finite requires a <= b")
    if a == b:
        return QuadResult(0.0, 0.0)
    kwargs = {}
    if points is not None:
        inner = [p for p in points if a < p < b]
        if inner:
            kwargs["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(
                f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                limit=spec.max_subdivisions, **kwargs,
            )
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                value, err = integrate.quad(
                    f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                    limit=spec.max_subdivisions, **kwargs,
                )
            raise ConvergenceError(str(exc), estimate=value, error=err) from None
    return QuadResult(value, err)


def integrate_semi_infinite(
    f: Callable[[float], float],
    a: float,
    spec: QuadratureSpec,
    decay_bound: Callable[[float], float],
    scan_points: int = 4096,
) -> QuadResult:
    """Integrate ``f`` over ``[a, inf)`` using a certified decay envelope.

    ``decay_bound(v)`` must bound ``log|f(v)|`` from above for ``v >= a``.
    The range is cut at the first ``V`` past which the envelope stays below
    ``spec.tail_cut_log``; the discarded tail is at most the integral of
    ``exp(decay_bound)`` beyond ``V``.
    """
    cut = spec.tail_cut_log
    span = 1.0
    for _ in range(64):
        if decay_bound(a + span) < cut:
            break
        span *= 2.0
    else:
        raise TruncationError("decay envelope never drops below the tail threshold")

    grid = a + np.linspace(0.0, 4.0 * span, scan_points + 1)
    env = np.array([decay_bound(v) for v in grid])
    above = np.nonzero(env >= cut)[0]
    if above.size == 0:
        upper = grid[1]
    elif above[-1] + 1 >= grid.size:
        raise TruncationError("decay envelope still above threshold at end of scan")
    else:
        upper = grid[above[-1] + 1]
    # the envelope has to stay down further out as well
    probe = a + 4.0 * span * 2.0 ** np.arange(1, 12)
    if any(decay_bound(v) >= cut for v in probe):
        raise TruncationError("decay envelope is not eventually below threshold")
    return integrate_finite(f, a, upper, spec)


def gauss_legendre(a: float, b: float, order: int, panels: int = 1):
    """Composite Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def integrate_vectorized(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints: Sequence[float] = (),
    order: int = 32,
    initial_panels: int = 2,
) -> QuadResult:
    """Panel-doubling Gauss-Legendre rule for vectorized integrands.

    ``f`` maps a 1-D array of nodes to an array whose first axis runs over
    the nodes; trailing axes are integrated independently, which lets one
    call handle a whole spatial grid. The interval is split at
    ``breakpoints`` so piecewise-smooth integrands converge at the smooth
    rate. Panels are doubled until two successive estimates agree.
    """
    if b < a:
        raise DomainError("integrate_vectorized requires a <= b")
    cuts = sorted({float(p) for p in breakpoints if a < p < b})
    edges = [a, *cuts, b]
    base_x, base_w = leggauss(order)

    def estimate(panels):
        nodes, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            e = np.linspace(lo, hi, panels + 1)
            half = 0.5 * (e[1:] - e[:-1])
            mid = 0.5 * (e[1:] + e[:-1])
            nodes.append((mid[:, None] + half[:, None] * base_x).ravel())
            weights.append((half[:, None] * base_w).ravel())
        x = np.concatenate(nodes)
        w = np.concatenate(weights)
        vals = np.asarray(f(x), dtype=float)
        return np.tensordot(w, vals, axes=(0, 0))

    panels = initial_panels
    previous = estimate(panels)
    while True:
        panels *= 2
        if panels > spec.max_subdivisions:
            raise ConvergenceError(
                "panel cap reached before convergence",
                estimate=previous, error=None,
            )
        current = estimate(panels)
        err = float(np.max(np.abs(current - previous)))
        if err <= spec.target(current):
            value = float(current) if np.ndim(current) == 0 else current
            return QuadResult(value, err)
        previous = current
