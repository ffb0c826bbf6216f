"""Command-line interface.

Subcommands ``green``, ``solve``, ``transform`` and ``probe`` write CSV
(LF line endings, 17 significant digits, header always present);
``verify`` runs the identity battery and prints one line per check.
Exit codes: 0 success, 1 verification failure, 2 usage, config or file
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import asymptotic, laplace, modal, solver, transform
from .config import grid_values, load_config, parse_override, RunConfig
from .errors import ConfigurationError, DomainError, KVGreenError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GREEN_HEADER = ["x", "xi", "t", "G0", "G_eps", "H", "abs_err"]
SOLVE_HEADER = ["x", "t", "u0", "u_eps", "u_approx"]
TRANSFORM_HEADER = ["t", "input", "output"]
PROBE_HEADER = ["eps", "tau", "error", "H", "ratio"]


class UsageError(KVGreenError):
    """Bad grid or argument in an otherwise readable config."""


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# -- green --------------------------------------------------------------------

def _check_space(values: np.ndarray, params: modal.MediumParams, name: str) -> None:
    if values.size and (np.min(values) < 0 or np.max(values) > params.l):
        raise UsageError(f"{name} values must lie in [0, l]")


def green_rows(cfg: RunConfig) -> list[tuple]:
    blk = cfg.block("green")
    prm = cfg.params
    xs = grid_values(blk.get("x"), "green.x")
    xis = grid_values(blk.get("xi"), "green.xi")
    ts = grid_values(blk.get("t"), "green.t")
    _check_space(xs, prm, "green.x")
    _check_space(xis, prm, "green.xi")
    if ts.size and np.min(ts) < 0:
        raise UsageError("green.t must be non-negative")
    policy = modal.SeriesPolicy(max_modes=int(blk["max_modes"]), tail_tol=float(blk["tail_tol"]))
    rows = []
    for x in xs:
        for xi in xis:
            for t in ts:
                pt = modal.GreenPoint(float(x), float(xi), float(t))
                g0 = modal.green_wave_images(prm, pt)
                if prm.eps > 0 and t > 0:
                    g = modal.green_eps_series(prm, pt, policy)
                    h = asymptotic.h_series(prm, pt, policy)
                elif prm.eps > 0:
                    g = h = 0.0
                else:
                    g = h = g0
                rows.append((x, xi, t, g0, g, h, abs(g - h)))
    return rows


# -- solve --------------------------------------------------------------------

def _table(path: str, base: Path | None) -> Callable[[np.ndarray], np.ndarray]:
    p = Path(path)
    if not p.is_absolute() and base is not None:
        p = base.parent / p
    try:
        arr = np.loadtxt(p, delimiter=",", ndmin=2, comments="#")
    except OSError as exc:
        raise ConfigurationError(f"cannot read table {p}: {exc}") from None
    except ValueError:
        # tolerate a header row
        try:
            arr = np.loadtxt(p, delimiter=",", ndmin=2, skiprows=1)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot parse table {p}: {exc}") from None
    if arr.shape[1] < 2 or arr.shape[0] < 2:
        raise ConfigurationError(f"table {p} needs two columns and at least two rows")
    order = np.argsort(arr[:, 0])
    xs, ys = arr[order, 0], arr[order, 1]
    return lambda x: np.interp(np.asarray(x, dtype=float), xs, ys)


def _boundary_signal(spec: dict | None):
    """Returns (signal, first derivative, second derivative) or Nones."""
    if not spec:
        return None, None, None
    kind = spec.get("kind", "constant")
    amp = float(spec.get("amplitude", 1.0))
    if kind == "constant":
        const = lambda t: np.full(np.shape(t), amp)  # noqa: E731
        zero = lambda t: np.zeros(np.shape(t))  # noqa: E731
        return const, zero, zero
    if kind == "sine":
        w = float(spec.get("freq", 1.0))
        return (lambda t: amp * np.sin(w * np.asarray(t, dtype=float)),
                lambda t: amp * w * np.cos(w * np.asarray(t, dtype=float)),
                lambda t: -amp * w * w * np.sin(w * np.asarray(t, dtype=float)))
    raise ConfigurationError(f"unknown boundary kind {kind!r}")


def build_problem(cfg: RunConfig) -> solver.ProblemData:
    """Resolve ``solve.data`` (plus tables and boundary signals) into ProblemData."""
    blk = cfg.block("solve")
    prm = cfg.params
    name = blk.get("data", "sect5")
    k = math.pi / prm.l
    if name == "sect5":
        data = solver.single_mode_problem(prm)
    elif name == "zero":
        data = solver.ProblemData()
    elif name == "mode":
        n = int(blk.get("mode", 1))
        amp = float(blk.get("amplitude", 1.0))
        if n < 1:
            raise ConfigurationError("solve.mode must be >= 1")
        data = solver.ProblemData(f0=lambda x: amp * np.sin(n * k * np.asarray(x, dtype=float)))
    elif name == "pulse":
        amp = float(blk.get("amplitude", 1.0))
        x0 = float(blk.get("center", 0.5)) * prm.l
        w = float(blk.get("width", 0.25)) * prm.l
        if w <= 0 or x0 - w < 0 or x0 + w > prm.l:
            raise ConfigurationError("solve.pulse must fit inside the strip")

        def bump(x):
            s = (np.asarray(x, dtype=float) - x0) / w
            return amp * np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 2, 0.0)
        data = solver.ProblemData(f0=bump)
    elif name == "table":
        tables = blk.get("tables") or {}
        if not tables:
            raise ConfigurationError("solve.data=table needs solve.tables.f0 and/or solve.tables.f1")
        zero = lambda x: np.zeros(np.shape(x))  # noqa: E731
        f0 = _table(tables["f0"], cfg.source) if "f0" in tables else zero
        f1 = _table(tables["f1"], cfg.source) if "f1" in tables else zero
        data = solver.ProblemData(f0=f0, f1=f1)
    else:
        raise ConfigurationError(f"unknown solve.data {name!r}")
    bnd = blk.get("boundary") or {}
    phi, phi_d, phi_dd = _boundary_signal(bnd.get("phi"))
    psi, psi_d, psi_dd = _boundary_signal(bnd.get("psi"))
    if phi is None and psi is None:
        return data
    return solver.ProblemData(
        f0=data.f0, f1=data.f1, f=data.f, phi=phi, psi=psi,
        phi_d=phi_d, psi_d=psi_d, phi_dd=phi_dd, psi_dd=psi_dd,
    )


def solve_rows(cfg: RunConfig) -> list[tuple]:
    blk = cfg.block("solve")
    prm = cfg.params
    xs = np.linspace(0.0, prm.l, 11) if blk.get("x") == "auto" else grid_values(blk.get("x"), "solve.x")
    ts = grid_values(blk.get("t"), "solve.t")
    _check_space(xs, prm, "solve.x")
    if ts.size and np.min(ts) < 0:
        raise UsageError("solve.t must be non-negative")
    if xs.size == 0 or ts.size == 0:
        return []
    data = build_problem(cfg)
    policy = modal.SeriesPolicy(max_modes=int(blk.get("max_modes", 256)))
    u0 = solver.solve(data, prm.with_eps(0.0), xs, ts, policy)
    if prm.eps > 0:
        u_eps = solver.solve(data, prm, xs, ts, policy)
        lifted, lift = solver.lift_boundary(data, prm)
        u_apx = solver.approx_viscous(lifted, prm, xs, ts, policy) + lift(xs[None, :], ts[:, None])
    else:
        u_eps = u_apx = u0
    rows = []
    for i, x in enumerate(xs):
        for j, t in enumerate(ts):
            rows.append((x, t, u0[j, i], u_eps[j, i], u_apx[j, i]))
    return rows


# -- transform / probe ------------------------------------------------------------

def transform_rows(cfg: RunConfig) -> list[tuple]:
    blk = cfg.block("transform")
    prm = cfg.params
    if prm.eps <= 0:
        raise UsageError("transform needs medium.eps > 0")
    ts = grid_values(blk.get("t"), "transform.t")
    if ts.size and np.min(ts) <= 0:
        raise UsageError("transform.t must be positive")
    kind = blk.get("signal", "mode")
    if kind == "mode":
        sig = transform.mode_signal(prm, int(blk.get("n", 1)))
    elif kind == "constant":
        sig = transform.constant_signal(float(blk.get("value", 1.0)))
    elif kind == "sine":
        sig = transform.sine_signal(float(blk.get("freq", 1.0)))
    elif kind == "green":
        x, xi = float(blk.get("x", 0.5)), float(blk.get("xi", 0.5))
        sig = transform.green_wave_signal(prm, x, xi)
    else:
        raise ConfigurationError(f"unknown transform.signal {kind!r}")
    return [(t, float(sig(np.array([t]))[0]), transform.kv_transform(sig, prm, float(t))) for t in ts]


def probe_rows(cfg: RunConfig) -> list[tuple]:
    blk = cfg.block("probe")
    prm = cfg.params
    ladder = grid_values(blk.get("eps_ladder"), "probe.eps_ladder")
    n_modes = blk.get("n_modes")
    pt = modal.GreenPoint(float(blk["x"]), float(blk["xi"]), float(blk["t"]))
    probe = asymptotic.remainder_probe(prm, pt, ladder, n_modes=None if n_modes is None else int(n_modes))
    ratios = list(probe.ratios) + [math.nan]
    return [
        (e, tau, err, h, r)
        for e, tau, err, h, r in zip(probe.eps_ladder, probe.tau_grid, probe.errors, probe.h_values, ratios)
    ]


# -- verify --------------------------------------------------------------------

@dataclass
class CheckOutcome:
    name: str
    error: float | None
    tolerance: float
    status: str  # "pass" | "fail" | "skipped"
    note: str = ""


def _judge(name, error, tol, note=""):
    status = "pass" if (error is not None and math.isfinite(error) and error < tol) else "fail"
    return CheckOutcome(name, error, tol, status, note)


def _check_laplace(prm):
    if prm.eps == 0:
        return 0.0, "eps = 0: both sides coincide"
    pts = np.linspace(0.1, 0.9, 5) * prm.l
    s_vals = [0.5, 2.0, 1.0 + 3.0j, 0.3 - 2.0j, 5.0 + 0.5j]
    worst = 0.0
    for x in pts:
        for xi in pts:
            rep = laplace.verify_identity_210(prm, float(x), float(xi), s_vals)
            worst = max(worst, rep.deviation)
    return worst, ""


def _check_gaussian(prm):
    return max(transform.verify_identity_32(prm, v, s).deviation
               for v, s in [(0.0, 0.0), (1.0, 1.0), (0.5, 2.0)]), ""


def _check_bessel(prm):
    return max(transform.verify_identity_34(prm, u, s).deviation
               for u, s in [(0.0, 1.0), (1.0, 1.0), (0.5, 0.2)]), ""


def _check_sine_bessel(prm):
    return max(transform.verify_identity_38(a, b, v).deviation
               for a, b, v in [(2.0, 1.0, 1.0), (3.0, 0.5, 0.7), (1.0, 2.0, 1.0)]), ""


def _check_window(prm, window):
    rep = transform.gamma_window_tail(prm, 8.0 * prm.eps, window)
    err = 1.0 - rep.r_squared if rep.slope < 0 else math.inf
    return err, f"slope {rep.slope:.4g}, R^2 {rep.r_squared:.6f}"


def _check_modes(prm):
    t = 1.0
    worst = 0.0
    for n in range(1, 6):
        got = transform.kv_transform(transform.mode_signal(prm, n), prm, t)
        want = float(modal.mode_kernel(prm, np.array([float(n)]), t)[0])
        worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    return worst, ""


def _check_remainder_single(prm):
    mid = 0.5 * prm.l
    probe = asymptotic.remainder_probe(prm, modal.GreenPoint(mid, mid, 2.0), [0.2, 0.1, 0.05], n_modes=1)
    worst = 0.0
    k = math.pi / prm.l
    for eps, err in zip(probe.eps_ladder, probe.errors):
        exact, approx = asymptotic.single_mode_amplitudes(prm.with_eps(eps), 1, 2.0)
        closed = 2.0 / (prm.c * math.pi) * math.sin(k * mid) ** 2 * abs(exact - approx)
        worst = max(worst, abs(err - closed))
    return worst, ""


def _check_remainder_monotone(prm, ladder):
    mid = 0.5 * prm.l
    probe = asymptotic.remainder_probe(prm, modal.GreenPoint(mid, mid, 2.0), ladder)
    return (0.0 if probe.monotone() else 1.0), "ratios " + ", ".join(f"{r:.3f}" for r in probe.ratios)


def _check_slow_modes(prm):
    worst = 0.0
    t = 1.0
    for n in range(1, 6):
        freq = math.pi * prm.c * n / prm.l
        got = asymptotic.h_convolution(transform.sine_signal(freq), prm, t)
        want = math.exp(-((math.pi * n / prm.l) ** 2) * prm.eps * t / 2.0) * math.sin(freq * t)
        worst = max(worst, abs(got - want))
    return worst, ""


def _check_diffusion_wave(prm):
    pts = [(0.3 * prm.l, 1.1), (0.55 * prm.l, 0.8), (0.7 * prm.l, 1.6)]
    xi = 0.4 * prm.l
    n_modes = asymptotic._h_modes(prm, 0.7, modal.SeriesPolicy())
    h0 = 0.4 * prm.l / (math.pi * n_modes)
    worst = 0.0
    for which in ("minus", "plus"):
        res = [asymptotic.diffusion_wave_residual(prm, which, pts, h0 / 2**i, xi) for i in range(3)]
        orders = [math.log2(res[i] / res[i + 1]) for i in range(2)]
        worst = max(worst, max(abs(o - 2.0) for o in orders))
    return worst, ""


def _check_theta(prm):
    rng = np.random.default_rng(7)
    h = 1e-4 * prm.l
    worst = 0.0
    for _ in range(10):
        x, xi = rng.uniform(0.1, 0.9, 2) * prm.l
        t = float(rng.uniform(0.3, 1.7))
        for idx, which in enumerate(("minus", "plus")):
            up = asymptotic.h_split(prm, modal.GreenPoint(x + h, xi, t))[idx]
            dn = asymptotic.h_split(prm, modal.GreenPoint(x - h, xi, t))[idx]
            fd = (up - dn) / (2.0 * h)
            worst = max(worst, abs(asymptotic.theta_form(prm, modal.GreenPoint(x, xi, t), which) - fd))
    return worst, ""


def run_verify(cfg: RunConfig) -> list[CheckOutcome]:
    blk = cfg.block("verify")
    tols = dict(blk.get("tolerances", {}))
    if blk.get("tolerance") is not None:
        tols = {k: float(blk["tolerance"]) for k in tols}
    prm = cfg.params
    win = blk.get("window", {})
    window = transform.WindowSpec(float(win.get("chi0", 0.5)), float(win.get("sigma0", 0.5)))
    ladder = [float(e) for e in blk.get("eps_ladder", [0.2, 0.1, 0.05, 0.025])]
    viscous = prm.eps > 0
    checks = [
        ("laplace_identity", lambda: _check_laplace(prm), True),
        ("gaussian_laplace", lambda: _check_gaussian(prm), viscous),
        ("bessel_laplace", lambda: _check_bessel(prm), viscous),
        ("sine_bessel", lambda: _check_sine_bessel(prm), True),
        ("window_tail", lambda: _check_window(prm, window), viscous),
        ("mode_eigenrelation", lambda: _check_modes(prm), viscous),
        ("remainder_single_mode", lambda: _check_remainder_single(prm), viscous),
        ("remainder_monotone", lambda: _check_remainder_monotone(prm, ladder), viscous),
        ("slow_time_eigenrelation", lambda: _check_slow_modes(prm), viscous),
        ("diffusion_wave_order", lambda: _check_diffusion_wave(prm), viscous),
        ("theta_form", lambda: _check_theta(prm), viscous),
    ]
    outcomes = []
    for name, fn, active in checks:
        tol = float(tols.get(name, 0.0))
        if not active:
            outcomes.append(CheckOutcome(name, None, tol, "skipped", "eps = 0"))
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                err, note = fn()
        except KVGreenError as exc:
            outcomes.append(CheckOutcome(name, None, tol, "fail", f"{type(exc).__name__}: {exc}"))
            continue
        outcomes.append(_judge(name, err, tol, note))
    return outcomes


def format_report(outcomes: list[CheckOutcome]) -> str:
    lines = [f"{'check':<26}{'error':>14}{'tolerance':>12}  status"]
    for o in outcomes:
        err = "-" if o.error is None else f"{o.error:.3e}"
        line = f"{o.name:<26}{err:>14}{o.tolerance:>12.1e}  {o.status.upper()}"
        if o.note:
            line += f"  ({o.note})"
        lines.append(line)
    failed = [o.name for o in outcomes if o.status == "fail"]
    lines.append("all checks passed" if not failed else "failed: " + ", ".join(failed))
    return "\n".join(lines) + "\n"


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kvgreen", description="Green functions of the viscous wave operator on a strip.")
    p.add_argument("command", choices=["green", "solve", "verify", "transform", "probe"])
    p.add_argument("-c", "--config", help="YAML config file (default: $KVGREEN_CONFIG)")
    p.add_argument("-o", "--output", help="output path, '-' for stdout")
    p.add_argument("--c", dest="wave_speed", type=float, help="override medium.c")
    p.add_argument("--l", dest="length", type=float, help="override medium.l")
    p.add_argument("--eps", type=float, help="override medium.eps")
    p.add_argument("--tol", type=float, help="verify: one tolerance for every check")
    p.add_argument("--json", help="verify: write a machine-readable summary here")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key, e.g. green.max_modes=4000")
    return p


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        key, value = parse_override(item)
        out[key] = value
    for key, value in (("medium.c", args.wave_speed), ("medium.l", args.length),
                       ("medium.eps", args.eps), ("output", args.output),
                       ("verify.tolerance", args.tol)):
        if value is not None:
            out[key] = value
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
        if args.command == "verify":
            outcomes = run_verify(cfg)
            sys.stdout.write(format_report(outcomes))
            if args.json:
                summary = [o.__dict__ for o in outcomes]
                Path(args.json).write_text(json.dumps(summary, indent=2) + "\n")
            return EXIT_FAIL if any(o.status == "fail" for o in outcomes) else EXIT_OK
        builders = {
            "green": (GREEN_HEADER, green_rows),
            "solve": (SOLVE_HEADER, solve_rows),
            "transform": (TRANSFORM_HEADER, transform_rows),
            "probe": (PROBE_HEADER, probe_rows),
        }
        header, build = builders[args.command]
        write_csv(cfg.output, header, build(cfg))
        return EXIT_OK
    except (ConfigurationError, UsageError, DomainError) as exc:
        sys.stderr.write(f"kvgreen: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"kvgreen: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
