"""Spin-amplitude evolution under ``H = hbar Omega(t) . s``.

The spin matrices are dimensionless, so ``Omega`` is an angular velocity in
both the quantum and the classical picture and the propagator over ``dt`` is
``exp(-i dt Omega . s)`` independent of ``hbar``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import ConstantOmega, OmegaSpec
from .errors import ConfigError, StateError
from .spin import SpinQuantum, SpinState, _as_spin, polarization_tensor, polarization_vector, spin_matrices

__all__ = [
    "SpinHamiltonian",
    "SpinTrajectory",
    "spin_hamiltonian",
    "evolve_spin_amplitude",
    "polarization_trajectory",
]


@dataclass(frozen=True, eq=False)
class SpinHamiltonian:
    matrix: np.ndarray
    omega: np.ndarray
    spin: SpinQuantum
    hbar: float = 1.0


def spin_hamiltonian(omega_value, spin, hbar: float = 1.0) -> SpinHamiltonian:
    spin = _as_spin(spin)
    omega_value = np.asarray(omega_value, dtype=float).reshape(3)
    matrix = hbar * spin_matrices(spin).dot(omega_value)
    return SpinHamiltonian(matrix, omega_value, spin, hbar)


def _propagator(mats, omega_value, dt):
    gen = mats.dot(omega_value)
    evals, evecs = np.linalg.eigh(gen)
    return (evecs * np.exp(-1j * dt * evals)) @ evecs.conj().T


@dataclass(frozen=True, eq=False)
class SpinTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_times, d)
    spin: SpinQuantum

    def __len__(self):
        return self.times.size

    def __getitem__(self, i):
        return SpinState(self.amplitudes[i], self.spin)

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def evolve_spin_amplitude(omega: OmegaSpec, chi0: SpinState, t_end: float, dt: float) -> SpinTrajectory:
    """Midpoint exponential propagation, one exact ``d x d`` exponential per step.

    ``dt`` is shrunk so that an integer number of steps lands on ``t_end``.
    Exact up to roundoff for constant ``Omega``, second order otherwise.
    """
    if abs(chi0.norm - 1.0) > 1e-8:
        raise StateError(f"initial spin state norm {chi0.norm!r} is not 1")
    if t_end < 0 or not dt > 0:
        raise ConfigError("need t_end >= 0 and dt > 0")
    n_steps = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0 else 0
    h_step = t_end / n_steps if n_steps else 0.0
    if h_step * omega.max_norm(0.0, t_end) > 0.1 + 1e-12:
        raise ConfigError(f"dt * |Omega|max = {h_step * omega.max_norm(0.0, t_end):.3g} exceeds 0.1")
    mats = spin_matrices(chi0.spin)
    times = np.linspace(0.0, t_end, n_steps + 1)
    amps = np.empty((n_steps + 1, chi0.spin.dim), dtype=complex)
    amps[0] = chi0.amplitudes
    chi = chi0.amplitudes.copy()
    fixed = _propagator(mats, omega(0.0), h_step) if isinstance(omega, ConstantOmega) else None
    for i in range(n_steps):
        U = fixed if fixed is not None else _propagator(mats, omega(times[i] + 0.5 * h_step), h_step)
        chi = U @ chi
        amps[i + 1] = chi
    drift = np.abs(np.linalg.norm(amps, axis=1) - 1.0).max()
    if drift > 1e-8:
        raise StateError(f"spin amplitude norm drifted by {drift:.3e}")
    return SpinTrajectory(times, amps, chi0.spin)


def polarization_trajectory(states):
    """Polarization vector per sample (n, 3) and tensor per sample (n, 3, 3), tensor ``None`` for S=1/2."""
    states = list(states)
    if not states:
        return np.empty((0, 3)), None
    vecs = np.array([polarization_vector(s) for s in states])
    if states[0].spin.two_s < 2:
        return vecs, None
    tens = np.array([polarization_tensor(s) for s in states])
    return vecs, tens
