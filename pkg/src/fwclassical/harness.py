"""Quantum-versus-classical correspondence experiments."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional

import numpy as np

from .classical import PhasePoint, integrate_trajectory
from .errors import ConfigError
from .model import Grid, HamiltonianSpec, eval_classical_hamiltonian
from .quantum import expectation, gaussian_packet, split_step_evolve, stationary_spectrum
from .wkb import bohr_sommerfeld_levels, wkb_validity

__all__ = [
    "Packet",
    "CorrespondenceReport",
    "ScalingStudy",
    "LevelRow",
    "correspondence_run",
    "hbar_scaling_study",
    "wkb_level_table",
    "write_csv",
]


@dataclass(frozen=True)
class Packet:
    x0: float
    p0: float
    width: float


@dataclass(frozen=True, eq=False)
class CorrespondenceReport:
    times: np.ndarray
    quantum_mean_x: np.ndarray
    quantum_mean_p: np.ndarray
    quantum_energy: np.ndarray
    quantum_norm: np.ndarray
    classical_x: np.ndarray
    classical_p: np.ndarray
    max_abs_dev_x: float
    max_abs_dev_p: float
    wkb_violation_fraction: float
    classical_energy: float

    def columns(self):
        return {
            "t": self.times,
            "qx": self.quantum_mean_x,
            "qp": self.quantum_mean_p,
            "cx": self.classical_x,
            "cp": self.classical_p,
            "dev_x": np.abs(self.quantum_mean_x - self.classical_x),
            "dev_p": np.abs(self.quantum_mean_p - self.classical_p),
        }


def correspondence_run(
    h: HamiltonianSpec,
    packet: Packet,
    t_end: float,
    n_samples: int,
    grid: Grid,
    dt: float = 1e-3,
    tol: float = 1e-10,
) -> CorrespondenceReport:
    """Evolve a Gaussian packet and the classical orbit from the same ``(x0, p0)``.

    The split-step time step is shrunk from ``dt`` so that samples fall on
    step boundaries.  The classical orbit starts from the packet's measured
    ``<x>`` and ``<p>``.  WKB diagnostics are taken at the classical energy
    ``H(x0, p0)``.
    """
    if packet.width < 4 * grid.dx:
        raise ConfigError(f"packet width {packet.width} is below 4 dx = {4 * grid.dx}")
    if t_end < 0:
        raise ConfigError("t_end must be nonnegative")
    n_samples = max(int(n_samples), 2) if t_end > 0 else 1
    E_cl = float(eval_classical_hamiltonian(h, packet.x0, packet.p0))
    psi0 = gaussian_packet(grid, packet.x0, packet.p0, packet.width, h.hbar)
    violation = wkb_validity(h, E_cl, grid).violation_fraction

    # the classical orbit starts from the measured moments of the discrete packet,
    # which equal (x0, p0) to rounding
    x_start = expectation(psi0, "position")
    p_start = expectation(psi0, "momentum", h)
    if t_end == 0:
        return _report(np.zeros(1), np.array([x_start]), np.array([p_start]),
                       np.array([expectation(psi0, "energy", h)]), np.array([psi0.norm]),
                       np.array([x_start]), np.array([p_start]), violation, E_cl)

    interval = t_end / (n_samples - 1)
    per = max(1, int(math.ceil(interval / dt - 1e-9)))
    step_dt = interval / per
    qx, qp, qH, qn = [], [], [], []

    def record(step, state):
        qx.append(expectation(state, "position"))
        qp.append(expectation(state, "momentum", h))
        qH.append(expectation(state, "energy", h))
        qn.append(state.norm)

    split_step_evolve(h, psi0, step_dt, per * (n_samples - 1), callback=record, every=per)
    traj = integrate_trajectory(h, PhasePoint(x_start, p_start), t_end, tol=tol, n_samples=n_samples)
    return _report(traj.t, np.array(qx), np.array(qp), np.array(qH), np.array(qn), traj.x, traj.p,
                   violation, E_cl)


def _report(t, qx, qp, qH, qn, cx, cp, violation, E_cl):
    return CorrespondenceReport(
        times=np.asarray(t, dtype=float),
        quantum_mean_x=qx,
        quantum_mean_p=qp,
        quantum_energy=qH,
        quantum_norm=qn,
        classical_x=np.asarray(cx),
        classical_p=np.asarray(cp),
        max_abs_dev_x=float(np.max(np.abs(qx - cx))),
        max_abs_dev_p=float(np.max(np.abs(qp - cp))),
        wkb_violation_fraction=violation,
        classical_energy=E_cl,
    )


@dataclass(frozen=True)
class ScalingStudy:
    rows: tuple  # (hbar_eff, max_abs_dev_x)
    monotone_flag: bool
    floor_flag: bool

    @property
    def hbars(self):
        return [r[0] for r in self.rows]

    @property
    def deviations(self):
        return [r[1] for r in self.rows]


def hbar_scaling_study(
    h: HamiltonianSpec,
    packet_template: Packet,
    t_end: float,
    hbar_list: Iterable[float],
    grid: Grid,
    n_samples: int = 201,
    dt: float = 1e-3,
    floor: Optional[float] = None,
) -> ScalingStudy:
    """One correspondence run per ``hbar``, packet width scaled with ``sqrt(hbar)``.

    The template's width belongs to ``h.hbar``.  ``floor_flag`` marks studies
    whose deviations all sit at the discretization floor (default
    ``1e-6 c t_end``), where monotonicity carries no information.
    """
    hbar_list = [float(v) for v in hbar_list]
    if not hbar_list:
        raise ConfigError("hbar_list must not be empty")
    if any(b >= a for a, b in zip(hbar_list, hbar_list[1:])):
        raise ConfigError("hbar_list must be strictly decreasing")
    if floor is None:
        floor = 1e-6 * h.c * t_end
    rows = []
    for hb in hbar_list:
        width = packet_template.width * math.sqrt(hb / h.hbar)
        pk = Packet(packet_template.x0, packet_template.p0, width)
        rep = correspondence_run(h.with_hbar(hb), pk, t_end, n_samples, grid, dt=dt)
        rows.append((hb, rep.max_abs_dev_x))
    devs = [r[1] for r in rows]
    monotone = all(b < a for a, b in zip(devs, devs[1:]))
    at_floor = all(d <= floor for d in devs)
    return ScalingStudy(tuple(rows), monotone, at_floor)


class LevelRow(NamedTuple):
    n: int
    E_wkb: float
    E_exact: float
    rel_err: float


def wkb_level_table(h: HamiltonianSpec, n_range: Iterable[int], grid: Grid) -> List[LevelRow]:
    """Bohr-Sommerfeld levels joined with exact grid eigenvalues by index.

    ``rel_err = |E_wkb - E_exact| / (E_exact - m c^2)``.
    """
    ns = sorted(int(n) for n in n_range)
    if not ns:
        return []
    exact = stationary_spectrum(h, grid, ns[-1] + 1).eigenvalues
    levels = {lv.n: lv.energy for lv in bohr_sommerfeld_levels(h, ns[0], ns[-1])}
    rows = []
    for n in ns:
        if n >= exact.size:
            warnings.warn(f"exact spectrum has only {exact.size} levels; table truncated at n={n}", RuntimeWarning)
            break
        E_ex = float(exact[n])
        E_wkb = levels[n]
        rows.append(LevelRow(n, E_wkb, E_ex, abs(E_wkb - E_ex) / (E_ex - h.rest_energy)))
    return rows


def write_csv(path, columns: dict):
    """Write equal-length columns with a single ``# name,name,...`` header line."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names]) if names else np.empty((0, 0))
    np.savetxt(path, data, delimiter=",", fmt="%.17g", header=",".join(names), comments="# ")
