"""``qtrap`` command line: stability maps, evolution traces, uncertainty traces,
duality demonstrations and the Fock-space identity suite.

Exit codes: 0 all checks passed, 1 a numerical check failed, 2 invalid
configuration (including a refused truncation), 3 integration failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import io as qio
from .config import RunConfig, load_config
from .dynamics import (
    classical_trajectory,
    sample_times,
    solve_config,
    stability_sweep,
)
from .errors import (
    ConfigError,
    GridTooCoarse,
    IntegrationError,
    Overflow,
    QtrapError,
    TruncationTooSmall,
)
from .fock import verify_bch, verify_coherent_to_squeezed, verify_sas, verify_similarity
from .gaussian import coherent_state, moments, muss_residual, squeeze_factor, uncertainty_products
from .ladder import ladder_coeffs

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_INTEGRATION = 0, 1, 2, 3

VERIFY_TOL = 1e-8
DUALITY_TOL = 1e-7
# relative slack for the z-p Schrodinger equality and the Z-P product
UNCERTAINTY_TOL = 1e-8

# (kind, params) pairs run by ``verify`` before any user-supplied point
BUILTIN_SAMPLE = (
    ("bch", {"r": 0.0, "theta": 0.0}),
    ("bch", {"r": 0.5, "theta": 2.0}),
    ("bch", {"r": 1.0, "theta": 0.0}),
    ("bch", {"r": 0.8, "theta": -1.1}),
    ("similarity", {"case": "rotation", "t": 0.7}),
    ("similarity", {"case": "squeeze", "r": 0.5}),
    ("sas", {"r": 0.5, "theta": 0.0}),
    ("sas", {"r": 0.8, "theta": 1.3}),
)


@dataclass
class Result:
    text: str
    code: int
    message: str = ""


def _threads(n):
    return n if n else (os.cpu_count() or 1)


# ------------------------------------------------------------------ commands

def cmd_stability(cfg: RunConfig, threads: int | None = None) -> Result:
    sw = cfg.require("stability").sweep
    a_vals = np.linspace(*sw.a_range, sw.resolution[0])
    q_vals = np.linspace(*sw.q_range, sw.resolution[1])
    verdicts = stability_sweep(a_vals, q_vals, sw.omega, sw.tol, _threads(threads))
    rows, failed = [], 0
    points = [(a, q) for q in q_vals for a in a_vals]
    for (a, q), v in zip(points, verdicts):
        if isinstance(v, Exception):
            failed += 1
            rows.append((a, q, "failed", float("nan"), float("nan")))
        else:
            rows.append((a, q, v.stable, v.monodromy_trace, v.growth_exponent))
    text = qio.table_text("stability", rows, cfg.output.format)
    if failed:
        return Result(text, EXIT_INTEGRATION, f"{failed} grid point(s) failed to integrate")
    return Result(text, EXIT_OK)


def _trace_times(cfg: RunConfig):
    ic = cfg.integration
    return sample_times(cfg.trap.t0, ic.t_end, ic.samples)


def cmd_evolve(cfg: RunConfig, threads: int | None = None) -> Result:
    cfg.require("evolve")
    sol = solve_config(cfg.trap, cfg.integration.t_end, cfg.integration.tol)
    rows = []
    for t in _trace_times(cfg):
        eps, deps = sol(t)
        z, p = classical_trajectory(sol, cfg.state.z0, cfg.state.p0, t)
        phi = abs(eps) ** 2
        phi_dot = 2.0 * (eps.conjugate() * deps).real
        w_err = abs(eps * deps.conjugate() - deps * eps.conjugate() + 2j)
        rows.append((t, z, p, eps.real, eps.imag, phi, phi_dot, w_err))
    return Result(qio.table_text("evolve", rows, cfg.output.format), EXIT_OK)


def uncertainty_row(sol, t, z0, p0, grid_cfg):
    state = coherent_state(sol, t, z0, p0)
    m = moments(state)
    u = uncertainty_products(state)
    B = squeeze_factor(state, m)
    res = muss_residual(state, B, grid_cfg.span_sigmas, grid_cfg.points_per_sigma)
    return (t, m.var_z, m.var_p, m.cov_zp, u.heisenberg_zp, u.schrodinger_rhs,
            u.heisenberg_ZP, B.real, B.imag, res)


def cmd_uncertainty(cfg: RunConfig, threads: int | None = None) -> Result:
    cfg.require("uncertainty")
    sol = solve_config(cfg.trap, cfg.integration.t_end, cfg.integration.tol)
    s = cfg.state
    with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
        rows = list(pool.map(lambda t: uncertainty_row(sol, float(t), s.z0, s.p0, cfg.grid),
                             _trace_times(cfg)))
    bad = [r[0] for r in rows
           if abs(r[4] - r[5]) > UNCERTAINTY_TOL * max(1.0, r[5])
           or abs(r[6] - 0.25) > UNCERTAINTY_TOL]
    text = qio.table_text("uncertainty", rows, cfg.output.format)
    if bad:
        return Result(text, EXIT_CHECK, f"uncertainty identities violated at {len(bad)} time(s)")
    return Result(text, EXIT_OK)


def cmd_duality(cfg: RunConfig, threads: int | None = None) -> Result:
    cfg.require("duality")
    t_end = cfg.integration.t_end
    tol = cfg.oracle.tolerance or DUALITY_TOL
    sol = solve_config(cfg.trap, t_end, cfg.integration.tol)
    lc = ladder_coeffs(sol, t_end)
    state = coherent_state(sol, t_end, cfg.state.z0, cfg.state.p0)
    m = moments(state)
    B = squeeze_factor(state, m)
    reports = verify_coherent_to_squeezed(cfg.state.alpha, lc, cfg.oracle.N, tol)
    d = reports[0].details
    payload = {
        "command": "duality",
        "t": t_end,
        "alpha": cfg.state.alpha,
        "mu": lc.mu,
        "nu": lc.nu,
        "r": d["r"],
        "theta": d["theta"],
        "u": d["u"],
        "v": d["v"],
        "beta": d["beta"],
        "B": B,
        "B_ratio_gap": abs(B) ** 2 - m.var_z / m.var_p,
        "N": cfg.oracle.N,
        "tolerance": tol,
        "residuals": {rep.identity.split(":")[1]: rep.residual for rep in reports},
        "checks": [_report_dict(rep) for rep in reports],
        "pass": all(rep.passed for rep in reports),
    }
    code = EXIT_OK if payload["pass"] else EXIT_CHECK
    return Result(qio.json_text(payload), code, "" if code == EXIT_OK else "duality residuals above tolerance")


def _report_dict(rep):
    d = rep.to_dict()
    d["converged"] = rep.converged
    return d


def _run_check(kind, params, N, tol, gamma3_shift):
    p = dict(params)
    try:
        if kind == "bch":
            reps = [verify_bch(p["r"], p["theta"], N, tol, gamma3_shift=gamma3_shift)]
        elif kind == "sas":
            reps = verify_sas(p["r"], p["theta"], N, tol)
        else:
            case = p.pop("case")
            reps = [verify_similarity(case, p, N, tol)]
    except (TruncationTooSmall, Overflow) as exc:
        return [{"identity": kind, "params": params, "N": N, "refused": str(exc), "pass": False}]
    return [_report_dict(r) for r in reps]


def cmd_verify(cfg: RunConfig, threads: int | None = None, tamper_gamma3: float = 0.0) -> Result:
    oc = cfg.require("verify").oracle
    tol = oc.tolerance or VERIFY_TOL
    jobs = list(BUILTIN_SAMPLE)
    if oc.r is not None:
        jobs += [("bch", {"r": oc.r, "theta": oc.theta}), ("sas", {"r": oc.r, "theta": oc.theta})]
    with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
        results = list(pool.map(lambda j: _run_check(j[0], j[1], oc.N, tol, tamper_gamma3), jobs))
    checks = [c for group in results for c in group]
    refused = [c for c in checks if "refused" in c]
    failed = [c for c in checks if "refused" not in c and not c["pass"]]
    payload = {
        "command": "verify",
        "N": oc.N,
        "tolerance": tol,
        "gamma3_shift": tamper_gamma3,
        "checks": checks,
        "failed": [f"{c['identity']} {c['params']}" for c in failed],
        "refused": [f"{c['identity']} {c['params']}" for c in refused],
        "pass": not failed and not refused,
    }
    text = qio.json_text(payload)
    if failed:
        return Result(text, EXIT_CHECK, "failed: " + "; ".join(payload["failed"]))
    if refused:
        return Result(text, EXIT_CONFIG,
                      "truncation too small (increase oracle.N): " + "; ".join(payload["refused"]))
    return Result(text, EXIT_OK)


COMMANDS = {
    "stability": cmd_stability,
    "evolve": cmd_evolve,
    "uncertainty": cmd_uncertainty,
    "duality": cmd_duality,
    "verify": cmd_verify,
}


def run(command: str, cfg: RunConfig, threads: int | None = None, **kwargs) -> Result:
    """Run a command, mapping library errors onto the exit-code contract."""
    try:
        return COMMANDS[command](cfg, threads, **kwargs)
    except TruncationTooSmall as exc:
        return Result("", EXIT_CONFIG, f"{exc} (raise oracle.N, e.g. --set oracle.N=120)")
    except (ConfigError, GridTooCoarse, Overflow) as exc:
        return Result("", EXIT_CONFIG, str(exc))
    except IntegrationError as exc:
        return Result("", EXIT_INTEGRATION, f"integration failed: {exc}")
    except QtrapError as exc:
        return Result("", EXIT_CHECK, f"{type(exc).__name__}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtrap", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--threads", type=int, default=None, help="worker pool size (default: all cores)")
        p.add_argument("--out", default=None, help="output path (default: output.path or stdout)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a config value; VALUE is parsed as JSON when possible")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "verify":
            p.add_argument("--tamper-gamma3", type=float, default=0.0,
                           help="perturb gamma_3 in the BCH checks (sensitivity canary)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.format:
        overrides.append(f"output.format={args.format}")
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"qtrap: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    kwargs = {"tamper_gamma3": args.tamper_gamma3} if args.command == "verify" else {}
    result = run(args.command, cfg, args.threads, **kwargs)
    if result.text:
        qio.emit(result.text, args.out if args.out is not None else cfg.output.path)
    if result.message:
        print(f"qtrap {args.command}: {result.message}", file=sys.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
