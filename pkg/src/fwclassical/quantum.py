"""Exact quantum reference for ``H = sqrt(m^2 c^4 + c^2 p^2) + U(x)``.

Periodic uniform grid, spectral kinetic operator.  Two tools:

* Strang split-step propagation (unitary, second order in ``dt``);
* dense diagonalization of the discretized Hamiltonian.

Only the ``V = 0`` subclass is supported: for momentum-dependent ``V`` the
operator square root has no unique ordering.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft
from scipy.linalg import circulant, eigh

from .errors import ConfigError, NumericalBlowupError, SolverError, StateError, UnsupportedModelError
from .model import Grid, HamiltonianSpec, eval_potential

__all__ = [
    "WavefunctionState",
    "SpectrumResult",
    "PacketNearEdgeWarning",
    "kinetic_symbol",
    "gaussian_packet",
    "plane_wave",
    "split_step_evolve",
    "stationary_spectrum",
    "expectation",
    "edge_probability",
]

NORM_TOL = 1e-8
EDGE_FRACTION = 0.05
EDGE_MASS = 1e-8


class PacketNearEdgeWarning(UserWarning):
    """Probability is leaking toward the periodic box boundary."""


@dataclass(frozen=True, eq=False)
class WavefunctionState:
    grid: Grid
    psi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape != (self.grid.n,):
            raise ConfigError(f"psi has shape {psi.shape}, grid expects ({self.grid.n},)")
        object.__setattr__(self, "psi", psi)

    @property
    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.grid.dx))

    def normalized(self):
        n = self.norm
        if n == 0:
            raise StateError("cannot normalize a zero wavefunction")
        return replace(self, psi=self.psi / n)

    @property
    def density(self):
        return np.abs(self.psi) ** 2


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, normalized with sum |v|^2 dx = 1
    grid: Grid
    residuals: np.ndarray

    def state(self, i):
        return WavefunctionState(self.grid, self.eigenvectors[:, i])


def _require_salpeter(h: HamiltonianSpec):
    if h.has_momentum_potential:
        raise UnsupportedModelError(
            "quantum evolution needs V = 0: sqrt(m^2c^4 + c^2p^2 + V(x,p)) is ordering-ambiguous"
        )


def kinetic_symbol(h: HamiltonianSpec, grid: Grid) -> np.ndarray:
    """``sqrt(m^2 c^4 + c^2 hbar^2 k^2)`` on the FFT wavenumber layout."""
    _require_salpeter(h)
    mc2 = h.rest_energy
    chk = h.c * h.hbar * grid.k
    return np.sqrt(mc2 * mc2 + chk * chk)


def gaussian_packet(grid: Grid, x0: float, p0: float, width: float, hbar: float) -> WavefunctionState:
    """``exp(-(x-x0)^2 / (2 width^2) + i p0 (x - x0) / hbar)``, normalized on the grid.

    Position spread is ``width / sqrt(2)``, momentum spread
    ``hbar / (sqrt(2) width)``; ``width = sqrt(hbar)`` is the minimum-uncertainty
    packet with equal spreads (the unit-oscillator coherent state).
    """
    if width <= 0:
        raise ConfigError("packet width must be positive")
    d = grid.x - x0
    psi = np.exp(-0.5 * (d / width) ** 2 + 1j * p0 * d / hbar)
    return WavefunctionState(grid, psi).normalized()


def plane_wave(grid: Grid, mode: int) -> WavefunctionState:
    """Normalized grid eigenmode ``exp(i k_mode x)``; ``mode`` indexes ``grid.k``."""
    psi = np.exp(1j * grid.k[mode] * (grid.x - grid.xmin))
    return WavefunctionState(grid, psi).normalized()


def edge_probability(state: WavefunctionState, fraction: float = EDGE_FRACTION) -> float:
    n_edge = max(1, int(round(fraction * state.grid.n)))
    rho = state.density
    return float((np.sum(rho[:n_edge]) + np.sum(rho[-n_edge:])) * state.grid.dx)


def _warn_edge(state):
    mass = edge_probability(state)
    if mass >= EDGE_MASS:
        warnings.warn(
            f"{mass:.2e} of the probability lies in the outer {EDGE_FRACTION:.0%} of the periodic box "
            f"at t={state.time:g}",
            PacketNearEdgeWarning,
            stacklevel=3,
        )


def _two_prod(a, b):
    # error-free product a*b = p + e (Dekker)
    p = a * b
    ah = 134217729.0 * a
    ah = ah - (ah - a)
    bh = 134217729.0 * b
    bh = bh - (bh - b)
    al, bl = a - ah, b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _ulp_step(v, k):
    for _ in range(abs(k)):
        v = np.nextafter(v, np.copysign(np.inf, k))
    return v


def _modulus_defect(re, im):
    """``re^2 + im^2 - 1`` evaluated without rounding loss."""
    p1, e1 = _two_prod(re, re)
    p2, e2 = _two_prod(im, im)
    s = p1 + p2
    bb = s - p1
    es = (p1 - (s - bb)) + (p2 - bb)
    return (s - 1.0) + es + e1 + e2


def _unit_phase(theta):
    """``exp(i theta)`` with components nudged by at most two ulps so that the
    stored complex number has modulus as close to 1 as doubles allow.

    Each propagation step multiplies by the same factors, so any modulus
    defect grows linearly with the step count.
    """
    z = np.exp(1j * np.asarray(theta, dtype=float))
    re0, im0 = z.real, z.imag
    best_re, best_im = re0.copy(), im0.copy()
    best = np.abs(_modulus_defect(re0, im0))
    for dr in (-2, -1, 0, 1, 2):
        re = _ulp_step(re0, dr)
        for di in (-2, -1, 0, 1, 2):
            im = _ulp_step(im0, di)
            d = np.abs(_modulus_defect(re, im))
            better = d < best
            best_re[better], best_im[better], best[better] = re[better], im[better], d[better]
    return best_re + 1j * best_im


def split_step_evolve(
    h: HamiltonianSpec,
    state: WavefunctionState,
    dt: float,
    n_steps: int,
    callback: Optional[Callable[[int, WavefunctionState], None]] = None,
    every: int = 1,
) -> WavefunctionState:
    """Strang splitting ``e^{-iU dt/2hbar} e^{-iT dt/hbar} e^{-iU dt/2hbar}`` per step.

    ``callback(step, state)`` is invoked after every ``every``-th step (and
    for step 0 before any propagation).
    """
    _require_salpeter(h)
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if abs(state.norm - 1.0) > NORM_TOL:
        raise StateError(f"initial state norm {state.norm!r} is not 1")
    grid = state.grid
    hbar = h.hbar
    T = kinetic_symbol(h, grid)
    U = np.broadcast_to(eval_potential(h.U, grid.x), grid.x.shape)
    # constant energy offsets only contribute a global phase, applied exactly on output
    offset = float(np.min(T)) + float(np.mean(U))
    T = T - np.min(T)
    U = U - np.mean(U)
    kin = _unit_phase(-T * (dt / hbar))
    half = _unit_phase(-0.5 * U * (dt / hbar))
    full = _unit_phase(-U * (dt / hbar))
    _warn_edge(state)
    if callback is not None:
        callback(0, state)
    if n_steps <= 0:
        return state

    t0 = state.time
    drift = lambda step: np.exp(-1j * offset * (step * dt / hbar))
    psi = state.psi * half
    for step in range(1, n_steps + 1):
        psi = sfft.ifft(kin * sfft.fft(psi))
        if callback is not None and step % every == 0:
            callback(step, WavefunctionState(grid, psi * half * drift(step), t0 + step * dt))
        if step < n_steps:
            psi *= full
        if step % 256 == 0 and not np.all(np.isfinite(psi)):
            raise NumericalBlowupError(f"non-finite wavefunction at step {step}", step=step)
    psi = psi * half * drift(n_steps)
    if not np.all(np.isfinite(psi)):
        raise NumericalBlowupError(f"non-finite wavefunction at step {n_steps}", step=n_steps)
    out = WavefunctionState(grid, psi, t0 + n_steps * dt)
    _warn_edge(out)
    return out


def hamiltonian_matrix(h: HamiltonianSpec, grid: Grid) -> np.ndarray:
    """Dense real-symmetric matrix ``F^-1 diag(T) F + diag(U)``."""
    T = kinetic_symbol(h, grid)
    # T is even in k, so the circulant kernel is real and symmetric
    col = sfft.ifft(T).real
    H = circulant(col)
    H[np.diag_indices_from(H)] += eval_potential(h.U, grid.x)
    return H


def stationary_spectrum(h: HamiltonianSpec, grid: Grid, n_levels: int) -> SpectrumResult:
    """Lowest ``n_levels`` eigenpairs of the discretized Hamiltonian, ascending."""
    _require_salpeter(h)
    if grid.n > 8192:
        raise ConfigError("dense diagonalization is limited to grids with n <= 8192")
    n_levels = int(min(max(n_levels, 0), grid.n))
    if n_levels == 0:
        return SpectrumResult(np.empty(0), np.empty((grid.n, 0)), grid, np.empty(0))
    H = hamiltonian_matrix(h, grid)
    try:
        if n_levels == grid.n:
            evals, evecs = eigh(H)
        else:
            evals, evecs = eigh(H, subset_by_index=[0, n_levels - 1], driver="evr")
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed: {exc}") from exc
    scale = max(np.max(np.abs(evals)), np.max(np.abs(np.diag(H))), 1e-300)
    residuals = np.linalg.norm(H @ evecs - evecs * evals, axis=0)
    if np.any(residuals > 1e-8 * scale):
        raise SolverError(f"eigenpair residual {residuals.max():.3e} exceeds 1e-8 * |H|")
    # deterministic sign: largest-magnitude component positive
    idx = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[idx, np.arange(evecs.shape[1])])
    evecs = evecs * signs / np.sqrt(grid.dx)
    return SpectrumResult(evals, evecs, grid, residuals)


def expectation(state: WavefunctionState, observable: str, h: Optional[HamiltonianSpec] = None) -> float:
    """``<x>``, ``<p>`` or ``<H>`` of a normalized state."""
    if abs(state.norm - 1.0) > NORM_TOL:
        raise StateError(f"state norm {state.norm!r} is not 1")
    grid = state.grid
    if observable == "position":
        return float(np.sum(grid.x * state.density) * grid.dx)
    phi2 = np.abs(sfft.fft(state.psi)) ** 2
    weight = phi2 / phi2.sum()
    if observable == "momentum":
        if h is None:
            raise ConfigError("momentum expectation needs hbar from a Hamiltonian")
        return float(h.hbar * np.sum(grid.k * weight))
    if observable == "energy":
        if h is None:
            raise ConfigError("energy expectation needs a Hamiltonian")
        kinetic = np.sum(kinetic_symbol(h, grid) * weight)
        potential = np.sum(eval_potential(h.U, grid.x) * state.density) * grid.dx
        return float(kinetic + potential)
    raise ConfigError(f"unknown observable {observable!r}")
