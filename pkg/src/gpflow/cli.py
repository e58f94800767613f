"""Command-line front end: ``gpflow solve | sweep | validate``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, fmt, load_config, write_field_csv
from .energy import energy, energy_gradient_pairing
from .gfsi import GroundStateResult, dissipation_audit, solve_ground_state
from .grid import WaveField, inner_l2, l2_norm
from .linalg import LinearSolveError
from .operator import FrozenHamiltonian, apply_h
from .physics import AssumptionWarning, coercivity_constants, potentials

log = logging.getLogger("gpflow")

SERIES_HEADER = ["n", "energy", "lambda", "mass", "tilde_l2", "inf_increment",
                 "h1_increment_sq", "krylov_iters", "tau_used"]
SUMMARY_HEADER = ["E", "mu", "steps", "converged", "stationarity_residual"]
SWEEP_HEADER = ["k11", "k12", "k22", "tau", "E", "steps", "converged", "monotone"]

EXIT_OK, EXIT_ERROR, EXIT_MAX_STEPS = 0, 1, 2


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_series(path: Path, result: GroundStateResult) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(SERIES_HEADER)
        for r in result.records:
            w.writerow([fmt(r.n), fmt(r.energy), fmt(r.lambda_), fmt(r.mass), fmt(r.tilde_l2),
                        fmt(r.inf_increment), fmt(r.h1_increment_sq), fmt(r.krylov_iters),
                        fmt(r.tau_used)])


def write_summary(path: Path, result: GroundStateResult) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(SUMMARY_HEADER)
        w.writerow([fmt(result.energy.total), fmt(result.mu), fmt(result.steps),
                    fmt(result.converged), fmt(result.stationarity_residual)])


def run_config(cfg: RunConfig, allow_indefinite: bool = False) -> GroundStateResult:
    p = cfg.physics()
    with warnings.catch_warnings():
        warnings.simplefilter("always", AssumptionWarning)
        p.check_assumptions()
    psi0 = cfg.initial_field()
    return solve_ground_state(psi0, p, cfg.solver(allow_indefinite))


def cmd_solve(args) -> int:
    cfg = _load(args)
    if cfg is None:
        return EXIT_ERROR
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        result = run_config(cfg, args.allow_indefinite)
    except (LinearSolveError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    write_series(out / "energy_series.csv", result)
    write_summary(out / "summary.csv", result)
    if cfg.emit_fields:
        write_field_csv(out / "field.csv", result.psi_g)
    log.info("E=%.10g mu=%.10g steps=%d converged=%s (%.1fs)", result.energy.total, result.mu,
             result.steps, result.converged, time.perf_counter() - t0)
    return EXIT_OK if result.converged else EXIT_MAX_STEPS


def sweep_cells(base: RunConfig, ks: list[float], taus: list[float]) -> list[RunConfig]:
    """One config per (k, tau); ``k`` sets k11 and scales k12, k22 by k / base.k11."""
    if base.k11 == 0:
        raise ConfigError("k11", "sweep needs a non-zero base k11 to fix the k11:k12:k22 ratio")
    cells = []
    for k in ks:
        s = k / base.k11
        for tau in taus:
            cells.append(replace(base, k11=k, k12=base.k12 * s, k22=base.k22 * s, tau=tau))
    return cells


def _run_cell(cell: RunConfig, allow_indefinite: bool):
    try:
        res = run_config(cell, allow_indefinite)
    except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the sweep
        return None, f"{type(exc).__name__}: {exc}"
    return (res.energy.total, res.steps, res.converged, res.monotone), None


def cmd_sweep(args) -> int:
    base = _load(args)
    if base is None:
        return EXIT_ERROR
    try:
        cells = sweep_cells(base, args.k or [base.k11], args.tau or [base.tau])
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(base.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_cell, cells, [args.allow_indefinite] * len(cells)))
    else:
        outcomes = [_run_cell(c, args.allow_indefinite) for c in cells]
    code = EXIT_OK
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(SWEEP_HEADER)
        for cell, (vals, err) in zip(cells, outcomes):
            head = [fmt(cell.k11), fmt(cell.k12), fmt(cell.k22), fmt(cell.tau)]
            if err is not None:
                print(f"cell k11={cell.k11:g} tau={cell.tau:g} failed: {err}", file=sys.stderr)
                w.writerow(head + ["", "", "false", "false"])
                code = EXIT_ERROR
                continue
            E, steps, conv, mono = vals
            w.writerow(head + [fmt(E), fmt(steps), fmt(conv), fmt(mono)])
            log.info("k11=%g tau=%g E=%.6f steps=%d converged=%s monotone=%s",
                     cell.k11, cell.tau, E, steps, conv, mono)
            if not conv and code == EXIT_OK:
                code = EXIT_MAX_STEPS
    return code


def validation_checks(cfg: RunConfig, seed: int, allow_indefinite: bool = False,
                      steps: int = 10) -> list[tuple[str, str, str]]:
    """Run the invariant suite; returns ``(name, PASS|FAIL|WARN, detail)`` rows."""
    rng = np.random.default_rng(seed)
    p = cfg.physics()
    g = cfg.grid()
    psi0 = cfg.initial_field()
    rows = []

    def rand_field():
        f = WaveField(g, rng.standard_normal((2, g.n, g.n)) + 1j * rng.standard_normal((2, g.n, g.n)))
        return f / l2_norm(f)

    # operator symmetry
    Hf = FrozenHamiltonian.at(psi0, p)
    worst = 0.0
    for _ in range(10):
        u, v = rand_field(), rand_field()
        worst = max(worst, abs(inner_l2(apply_h(Hf, u), v) - inner_l2(u, apply_h(Hf, v))) /
                    max(1.0, l2_norm(apply_h(Hf, u)) * l2_norm(v)))
    rows.append(("operator symmetry", "PASS" if worst <= 1e-11 else "FAIL", f"max rel gap {worst:.2e}"))

    # gradient check: central differences must converge at second order
    phi = rand_field() * 0.1
    exact = energy_gradient_pairing(psi0, phi, p)
    eps = np.array([1e-2, 1e-3])
    errs = []
    for e in eps:
        fd = (energy(psi0 + phi * e, p).total - energy(psi0 - phi * e, p).total) / (2 * e)
        errs.append(abs(fd - exact))
    if errs[0] == 0 or errs[1] == 0:
        slope = 2.0 if max(errs) < 1e-12 else float("nan")
    else:
        slope = math.log10(errs[0] / errs[1])
    ok = abs(slope - 2.0) <= 0.2 or max(errs) < 1e-12 * max(1.0, abs(exact))
    rows.append(("gradient check", "PASS" if ok else "FAIL", f"observed order {slope:.3f}"))

    # multiplier bounds on the first steps
    scfg = replace(cfg.solver(allow_indefinite), max_steps=steps)
    try:
        res = solve_ground_state(psi0, p, scfg)
        recs = res.records
        mass_dev = max(abs(r.mass - 1.0) for r in recs)
        tl = max(r.tilde_l2 for r in recs)
        lam = min(r.lambda_ for r in recs)
        rows.append(("mass conservation", "PASS" if mass_dev <= 1e-12 else "FAIL", f"max |mass-1| {mass_dev:.2e}"))
        rows.append(("||Psi_tilde|| <= 1", "PASS" if tl <= 1 + 1e-8 else "FAIL", f"max {tl:.12f}"))
        rows.append(("lambda >= 0", "PASS" if lam >= -1e-8 else "FAIL", f"min {lam:.6g}"))
        audit = dissipation_audit(recs, res.initial_energy, coercivity_constants(p, g))
        rows.append(("energy monotone", "PASS" if audit.monotone else "FAIL",
                     "all steps" if audit.monotone else f"first increase at step {audit.first_increase}"))
    except LinearSolveError as exc:
        rows.append(("GFSI steps", "FAIL", str(exc)))

    # coercivity assumption and pointwise scan
    rep = coercivity_constants(p, g)
    if rep.satisfied:
        X, Y = g.mesh()
        v1, v2 = potentials(p, g)
        r2 = X * X + Y * Y
        alpha = rep.alpha if math.isfinite(rep.alpha) else 0.0
        scan = all(
            np.all(v >= (1 + alpha) / 2 * om * om * r2 + abs(p.beta) - 1e-12)
            for v, om in ((v1, p.omega1), (v2, p.omega2))
        )
        rows.append(("coercivity (A1)", "PASS" if scan else "FAIL",
                     f"alpha={rep.alpha:.6g} C0={rep.C0:.6g}"))
    else:
        detail = "potential must dominate the rotation: need gamma > max(omega)^2"
        if rep.alpha is not None:
            detail = f"alpha={rep.alpha:.6g} <= 0; {detail}"
        rows.append(("coercivity (A1)", "FAIL", f"satisfied=false; {detail}"))

    if p.interaction_ok():
        rows.append(("interaction matrix (A2)", "PASS", "K positive definite or non-negative"))
    else:
        rows.append(("interaction matrix (A2)", "WARN",
                     f"K={p.K.tolist()} neither positive definite nor non-negative"))
    return rows


def cmd_validate(args) -> int:
    cfg = _load(args)
    if cfg is None:
        return EXIT_ERROR
    rows = validation_checks(cfg, args.seed, args.allow_indefinite)
    width = max(len(r[0]) for r in rows)
    for name, status, detail in rows:
        print(f"{name:<{width}}  {status:<4}  {detail}")
    failed = [r for r in rows if r[1] == "FAIL"]
    if failed:
        print(f"{len(failed)} check(s) failed", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def _load(args) -> RunConfig | None:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None
    if args.output_dir:
        cfg = replace(cfg, output_dir=args.output_dir)
    return cfg


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="flat key = value configuration file")
    common.add_argument("--output-dir", default=None, help="override output_dir from the config")
    common.add_argument("--allow-indefinite", action="store_true",
                        help="fall back to MINRES when the shifted operator is indefinite")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized validation checks")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="gpflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="compute a ground state").set_defaults(func=cmd_solve)
    sw = sub.add_parser("sweep", parents=[common], help="scan interaction strength and time step")
    sw.add_argument("--k", type=_float_list, default=None, help="k11 values, e.g. '1000,5000'")
    sw.add_argument("--tau", type=_float_list, default=None, help="time steps, e.g. '1,0.6,0.2'")
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)
    sub.add_parser("validate", parents=[common], help="run the invariant suite").set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
