"""``fw-classical`` command line entry point.

Every subcommand reads one JSON config (``--config``) and writes a CSV with a
single ``#`` header line (``--out``, default stdout).  Exit status: 0 on
success, 2 on configuration errors, 3 on numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .classical import PhasePoint, integrate_trajectory, spin_precession_classical
from .config import load_config
from .errors import ConfigError, FWClassicalError
from .harness import correspondence_run, hbar_scaling_study, write_csv
from .quantum import expectation, gaussian_packet, split_step_evolve, stationary_spectrum
from .spin import SpinQuantum, SpinState
from .spin_dynamics import evolve_spin_amplitude, polarization_trajectory
from .wkb import bohr_sommerfeld_levels, wkb_validity

log = logging.getLogger("fwclassical")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _run_value(cfg, key, default=None, cast=float):
    if key not in cfg.run:
        if default is None:
            raise ConfigError(f"run.{key} is required for this command")
        return default
    try:
        return cast(cfg.run[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"run.{key}: {exc}") from exc


def _parse_range(text):
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return int(a), int(b)
        n = int(text)
        return n, n
    except ValueError as exc:
        raise ConfigError(f"--n expects 'a..b' or an integer, got {text!r}") from exc


# --- subcommands -------------------------------------------------------------


def cmd_wkb(args, cfg):
    h = cfg.require("hamiltonian")
    diag = wkb_validity(
        h, args.energy, cfg.grid,
        slope_threshold=_run_value(cfg, "slope_threshold", 0.1),
        length_ratio=_run_value(cfg, "length_ratio", 0.1),
    )
    log.info("violation fraction %.4f, long-range caution %s", diag.violation_fraction, diag.long_range_caution)
    return {
        "x": diag.x,
        "P": diag.momentum,
        "lambda": diag.wavelength,
        "dlambda_dx": diag.dlambda_dx,
        "allowed": diag.allowed.astype(float),
        "violation": diag.violation_mask.astype(float),
    }


def cmd_wkb_levels(args, cfg):
    h = cfg.require("hamiltonian")
    n_min, n_max = _parse_range(args.n)
    levels = bohr_sommerfeld_levels(h, n_min, n_max, maslov=_run_value(cfg, "maslov", 0.5))
    return {
        "n": [lv.n for lv in levels],
        "E_n": [lv.energy for lv in levels],
        "action_residual": [lv.action_residual for lv in levels],
    }


def cmd_spectrum(args, cfg):
    h = cfg.require("hamiltonian")
    spec = stationary_spectrum(h, cfg.grid, args.levels)
    return {"n": np.arange(spec.eigenvalues.size), "E_n": spec.eigenvalues}


def cmd_evolve(args, cfg):
    h = cfg.require("hamiltonian")
    packet = cfg.require("packet")
    t_end = _run_value(cfg, "t_end")
    n_samples = _run_value(cfg, "n_samples", 101, int)
    dt = _run_value(cfg, "dt", 1e-3)
    interval = t_end / max(n_samples - 1, 1)
    per = max(1, int(np.ceil(interval / dt - 1e-9)))
    rows = {"t": [], "x": [], "p": [], "H": [], "norm": []}

    def record(step, state):
        rows["t"].append(state.time)
        rows["x"].append(expectation(state, "position"))
        rows["p"].append(expectation(state, "momentum", h))
        rows["H"].append(expectation(state, "energy", h))
        rows["norm"].append(state.norm)

    psi0 = gaussian_packet(cfg.grid, packet.x0, packet.p0, packet.width, h.hbar)
    n_steps = per * (n_samples - 1) if t_end > 0 else 0
    split_step_evolve(h, psi0, interval / per if t_end > 0 else 1.0, n_steps, callback=record, every=per)
    return rows


def cmd_trajectory(args, cfg):
    h = cfg.require("hamiltonian")
    traj = integrate_trajectory(
        h, PhasePoint(args.x0, args.p0), args.tend,
        tol=_run_value(cfg, "tol", 1e-10),
        n_samples=_run_value(cfg, "n_samples", 201, int),
    )
    log.info("relative energy drift %.3e over %d steps", traj.energy_drift, traj.n_steps)
    return {"t": traj.t, "x": traj.x, "p": traj.p, "H": traj.H}


def cmd_precess(args, cfg):
    omega = cfg.require("omega")
    s0 = cfg.run.get("s0", [1.0, 0.0, 0.0])
    t, s = spin_precession_classical(
        omega, s0, _run_value(cfg, "t_end"),
        tol=_run_value(cfg, "tol", 1e-12),
        n_samples=_run_value(cfg, "n_samples", 201, int),
    )
    return {"t": t, "s_x": s[:, 0], "s_y": s[:, 1], "s_z": s[:, 2]}


def _initial_spin_state(cfg, rng):
    spin = SpinQuantum(_run_value(cfg, "two_s", 1, int))
    chi0 = cfg.run.get("chi0")
    if chi0 is None:
        return SpinState.coherent(spin, cfg.run.get("direction", [0.0, 0.0, 1.0]))
    if chi0 == "random":
        return SpinState.random(spin, rng)
    return SpinState.from_dict({"two_s": spin.two_s, "amplitudes": chi0}).normalized()


def cmd_spin(args, cfg):
    omega = cfg.require("omega")
    rng = np.random.default_rng(args.seed)
    chi0 = _initial_spin_state(cfg, rng)
    traj = evolve_spin_amplitude(omega, chi0, _run_value(cfg, "t_end"), _run_value(cfg, "dt", 1e-3))
    vecs, tens = polarization_trajectory(traj)
    cols = {"t": traj.times, "P_x": vecs[:, 0], "P_y": vecs[:, 1], "P_z": vecs[:, 2]}
    if tens is not None:
        for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]:
            cols[f"P_{'xyz'[i]}{'xyz'[j]}"] = tens[:, i, j]
    return cols


def cmd_correspond(args, cfg):
    h = cfg.require("hamiltonian")
    rep = correspondence_run(
        h, cfg.require("packet"), _run_value(cfg, "t_end"), _run_value(cfg, "n_samples", 201, int), cfg.grid,
        dt=_run_value(cfg, "dt", 1e-3), tol=_run_value(cfg, "tol", 1e-10),
    )
    log.info("max |dx| %.3e, max |dp| %.3e, WKB violation fraction %.3f",
             rep.max_abs_dev_x, rep.max_abs_dev_p, rep.wkb_violation_fraction)
    return rep.columns()


def cmd_scaling(args, cfg):
    h = cfg.require("hamiltonian")
    hbar_list = cfg.run.get("hbar_list")
    if not hbar_list:
        raise ConfigError("run.hbar_list is required for this command")
    study = hbar_scaling_study(
        h, cfg.require("packet"), _run_value(cfg, "t_end"), hbar_list, cfg.grid,
        n_samples=_run_value(cfg, "n_samples", 201, int), dt=_run_value(cfg, "dt", 1e-3),
    )
    log.info("monotone=%s floor=%s", study.monotone_flag, study.floor_flag)
    print(json.dumps({"monotone_flag": study.monotone_flag, "floor_flag": study.floor_flag}), file=sys.stderr)
    return {"hbar": study.hbars, "max_abs_dev_x": study.deviations}


COMMANDS = {
    "wkb": cmd_wkb,
    "wkb-levels": cmd_wkb_levels,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "trajectory": cmd_trajectory,
    "precess": cmd_precess,
    "spin": cmd_spin,
    "correspond": cmd_correspond,
    "scaling": cmd_scaling,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fw-classical", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file")
    common.add_argument("--out", default="-", help="CSV output path (default: stdout)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized state generation")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wkb", parents=[common], help="generalized momentum and WKB validity on the grid")
    p.add_argument("--energy", type=float, required=True)
    p = sub.add_parser("wkb-levels", parents=[common], help="Bohr-Sommerfeld levels")
    p.add_argument("--n", default="0..20", help="quantum numbers, inclusive range a..b")
    p = sub.add_parser("spectrum", parents=[common], help="exact grid eigenvalues")
    p.add_argument("--levels", type=int, default=10)
    sub.add_parser("evolve", parents=[common], help="split-step evolution of a Gaussian packet")
    p = sub.add_parser("trajectory", parents=[common], help="classical Hamilton trajectory")
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--tend", type=float, required=True)
    sub.add_parser("precess", parents=[common], help="classical spin precession")
    sub.add_parser("spin", parents=[common], help="spin-amplitude evolution and polarization")
    sub.add_parser("correspond", parents=[common], help="quantum vs classical correspondence run")
    sub.add_parser("scaling", parents=[common], help="hbar scaling study")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        columns = COMMANDS[args.command](args, cfg)
        out = sys.stdout if args.out == "-" else args.out
        write_csv(out, columns)
    except ConfigError as exc:
        print(f"fw-classical: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FWClassicalError as exc:
        print(f"fw-classical: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FloatingPointError as exc:
        print(f"fw-classical: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
