"""Zero-order quasiclassical (WKB) machinery for the square-root Hamiltonian.

The central object is the generalized momentum ``P(x)``, the nonnegative
root of ``E = sqrt(m^2 c^4 + c^2 P^2 + V(x, P)) + U(x)``.  Everything else
(actions, phases, validity diagnostics, quantized levels) is built on it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import _backend
from .errors import ConfigError, DomainError, SolverError, StructureError
from .model import Grid, HamiltonianSpec, eval_potential

__all__ = [
    "WKBSolution",
    "WKBDiagnostics",
    "BSLevel",
    "generalized_momentum",
    "momentum_profile",
    "turning_points",
    "allowed_intervals",
    "solve_wkb",
    "action_integral",
    "total_action",
    "wkb_phase",
    "wkb_wavefunction",
    "wkb_validity",
    "bohr_sommerfeld_levels",
]

MAX_GL_NODES = 1 << 16


# --- generalized momentum ----------------------------------------------------


def momentum_profile(h: HamiltonianSpec, E: float, x) -> np.ndarray:
    """Vectorized generalized momentum; ``nan`` where classically forbidden."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not math.isfinite(E):
        raise ConfigError(f"energy must be finite, got {E!r}")
    U = eval_potential(h.U, x)
    w = E - U
    d0 = np.broadcast_to(h.static_part(x), x.shape)
    coeffs = h.momentum_coefficients(x)
    c2 = h.c**2
    p_max = 10.0 * (abs(E) + abs(float(np.min(U)))) / h.c
    u_init = p_max * p_max if p_max > 0 else 1.0
    P, status = _backend.momentum_roots(w, d0, coeffs, c2, u_init)
    bad = (status == _backend.NON_MONOTONE) | (status == _backend.NO_BRACKET)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        what = "non-monotone residual" if status[i] == _backend.NON_MONOTONE else "no sign change found"
        raise SolverError(f"momentum inversion failed at x={float(x[i]):.17g}: {what}")
    return P


def generalized_momentum(h: HamiltonianSpec, E: float, x: float) -> Optional[float]:
    """``P(x)`` at one point, or ``None`` where the point is classically forbidden."""
    P = momentum_profile(h, E, [x])[0]
    return None if np.isnan(P) else float(P)


# --- turning points ----------------------------------------------------------


def _kinetic_margin(h, E, x):
    """``E - H(x, 0)``; its sign marks allowed (>=0) versus forbidden (<0) points."""
    x = np.asarray(x, dtype=float)
    d0 = np.asarray(h.static_part(x))
    return E - eval_potential(h.U, x) - np.sqrt(np.maximum(d0, 0.0))


def _refine(h, E, a, b):
    """Bisect a sign change of the kinetic margin down to adjacent floats.

    Returns the end of the final bracket on the forbidden side (margin <= 0),
    where the generalized momentum is zero or absent.
    """
    fa = float(_kinetic_margin(h, E, a))
    fb = float(_kinetic_margin(h, E, b))
    if fa == 0:
        return a
    if fb == 0:
        return b
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= min(a, b) or mid >= max(a, b):
            break
        fm = float(_kinetic_margin(h, E, mid))
        if fm == 0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return a if fa < 0 else b


def turning_points(h: HamiltonianSpec, E: float, domain=None, n_scan: int = 1024) -> List[float]:
    """Ordered positions where ``P(x)`` vanishes and the allowed region ends."""
    if n_scan < 64:
        raise ConfigError("n_scan must be at least 64")
    lo, hi = domain if domain is not None else h.domain
    xs = np.linspace(lo, hi, int(n_scan))
    f = _kinetic_margin(h, E, xs)
    s = np.sign(f)
    nz = np.flatnonzero(s != 0)
    out = []
    for i, j in zip(nz[:-1], nz[1:]):
        if s[i] == s[j]:
            continue
        if j == i + 1:
            out.append(float(_refine(h, E, xs[i], xs[j])))
        else:
            # run of exact zeros between opposite signs: keep the zero next to the forbidden side
            out.append(float(xs[i + 1] if s[i] < 0 else xs[j - 1]))
    return out


def allowed_intervals(h: HamiltonianSpec, E: float, domain=None, points=None) -> List[tuple]:
    lo, hi = domain if domain is not None else h.domain
    if points is None:
        points = turning_points(h, E, (lo, hi))
    edges = [lo] + [p for p in points if lo < p < hi] + [hi]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        if _kinetic_margin(h, E, 0.5 * (a + b)) >= 0:
            if out and out[-1][1] == a:
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
    return out


@dataclass(frozen=True, eq=False)
class WKBSolution:
    energy: float
    grid: Grid
    momentum: np.ndarray
    turning_points: list
    allowed_intervals: list

    @property
    def allowed(self):
        return ~np.isnan(self.momentum)


def solve_wkb(h: HamiltonianSpec, E: float, grid: Grid, n_scan: int = 4096) -> WKBSolution:
    domain = (grid.xmin, grid.x[-1])
    tps = turning_points(h, E, domain, n_scan=n_scan)
    return WKBSolution(
        energy=E,
        grid=grid,
        momentum=momentum_profile(h, E, grid.x),
        turning_points=tps,
        allowed_intervals=allowed_intervals(h, E, domain, tps),
    )


# --- actions -----------------------------------------------------------------


def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _action_quadrature(h, E, a, b, rtol):
    """Integral of P over [a, b] with x = a + (b - a)(1 - cos t)/2, t in [0, pi].

    The substitution absorbs the square-root behaviour of P at turning points,
    leaving a smooth integrand for Gauss-Legendre in t.
    """
    span = b - a
    edge = 1e-9 * abs(span)
    prev = None
    n = 16
    while n <= MAX_GL_NODES:
        t, wts = _gauss_legendre(n)
        theta = 0.5 * np.pi * (t + 1.0)
        x = a + 0.5 * span * (1.0 - np.cos(theta))
        P = momentum_profile(h, E, x)
        missing = np.isnan(P)
        if missing.any():
            near_end = (np.abs(x - a) <= edge) | (np.abs(x - b) <= edge)
            if np.any(missing & ~near_end):
                i = int(np.flatnonzero(missing & ~near_end)[0])
                raise DomainError(f"[{a}, {b}] crosses a classically forbidden point near x={float(x[i]):.17g}")
            P = np.where(missing, 0.0, P)
        value = 0.5 * np.pi * np.sum(wts * P * 0.5 * span * np.sin(theta))
        if prev is not None and abs(value - prev) <= rtol * abs(value):
            return value
        if prev is not None and value == 0.0 and prev == 0.0:
            return value
        prev = value
        n *= 2
    warnings.warn(f"action quadrature on [{a}, {b}] did not reach rtol={rtol}", RuntimeWarning)
    return prev


def action_integral(h: HamiltonianSpec, E: float, x0: float, x1: float, rtol: float = 1e-10) -> float:
    """Time-independent action: the integral of ``P(x)`` from ``x0`` to ``x1``.

    Both endpoints may be turning points.  The whole interval must lie in one
    classically allowed region.
    """
    if x0 == x1:
        return 0.0
    sign = 1.0
    a, b = float(x0), float(x1)
    if b < a:
        a, b, sign = b, a, -1.0
    probe = np.linspace(a, b, 259)[1:-1]
    margin = _kinetic_margin(h, E, probe)
    if np.any(margin < 0):
        i = int(np.flatnonzero(margin < 0)[0])
        raise DomainError(f"[{a}, {b}] crosses a classically forbidden point near x={float(probe[i]):.17g}")
    return sign * _action_quadrature(h, E, a, b, rtol)


def total_action(E: float, t: float, spatial_action: float) -> float:
    """Full action ``-E t + S(x)``."""
    return -E * t + spatial_action


# --- quasiclassical wavefunction ---------------------------------------------

_CELL_GL = _gauss_legendre(8)


def wkb_phase(h: HamiltonianSpec, E: float, grid: Grid) -> np.ndarray:
    """Zero-order phase ``(1/hbar) * integral_{x_0}^{x_j} P`` at every grid node."""
    x = grid.x
    dx = grid.dx
    t, wts = _CELL_GL
    nodes = (x[:-1, None] + 0.5 * dx * (t[None, :] + 1.0)).ravel()
    P_nodes = momentum_profile(h, E, x)
    P_cells = momentum_profile(h, E, nodes)
    if np.isnan(P_nodes).any() or np.isnan(P_cells).any():
        raise DomainError("the grid reaches into a classically forbidden region")
    cell = 0.5 * dx * (P_cells.reshape(-1, t.size) @ wts)
    phase = np.concatenate(([0.0], np.cumsum(cell)))
    return phase / h.hbar


def wkb_wavefunction(h: HamiltonianSpec, E: float, grid: Grid, amplitude_mode: str = "zero_order") -> np.ndarray:
    """Quasiclassical wavefunction on ``grid``.

    ``zero_order`` is the pure phase ``exp(i S / hbar)``.  ``first_order``
    additionally applies the standard ``P^(-1/2)`` amplitude and normalizes
    the result on the grid; that factor goes one order beyond the classical
    limit.
    """
    phase = wkb_phase(h, E, grid)
    psi = np.exp(1j * phase)
    if amplitude_mode == "zero_order":
        return psi
    if amplitude_mode != "first_order":
        raise ConfigError(f"unknown amplitude_mode {amplitude_mode!r}")
    P = momentum_profile(h, E, grid.x)
    if np.any(P <= 0):
        raise DomainError("first-order amplitude diverges at a turning point on the grid")
    psi = psi / np.sqrt(P)
    return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)


# --- validity ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WKBDiagnostics:
    x: np.ndarray
    momentum: np.ndarray
    wavelength: np.ndarray
    dlambda_dx: np.ndarray
    char_length: np.ndarray
    violation_mask: np.ndarray
    long_range_caution: bool
    degenerate: bool
    thresholds: tuple = field(default=(0.1, 0.1))

    @property
    def allowed(self):
        return ~np.isnan(self.momentum)

    @property
    def violation_fraction(self):
        """Share of classically allowed nodes that fail a validity test."""
        allowed = self.allowed
        if not allowed.any():
            return 1.0
        return float(np.mean(self.violation_mask[allowed]))


def wkb_validity(h: HamiltonianSpec, E: float, grid: Grid, slope_threshold: float = 0.1,
                 length_ratio: float = 0.1) -> WKBDiagnostics:
    """Nodewise checks of ``lambda << l`` and ``|d lambda / dx| << 1``.

    ``lambda = 2 pi hbar / P`` (infinite where forbidden); the characteristic
    length is ``|U / U'|`` (infinite where ``U' = 0``).  A node violates when
    ``|d lambda/dx| >= slope_threshold`` or ``lambda >= length_ratio * l``.
    """
    x = grid.x
    P = momentum_profile(h, E, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(np.isnan(P) | (P == 0), np.inf, 2.0 * np.pi * h.hbar / P)
        dlam = np.empty_like(lam)
        dlam[1:-1] = (lam[2:] - lam[:-2]) / (2.0 * grid.dx)
        dlam[0] = (lam[1] - lam[0]) / grid.dx
        dlam[-1] = (lam[-1] - lam[-2]) / grid.dx
        dlam = np.abs(dlam)
        dlam[~np.isfinite(dlam)] = np.inf
        U = np.broadcast_to(eval_potential(h.U, x), x.shape)
        dU = np.broadcast_to(h.U.derivative(x), x.shape)
        ell = np.where(dU == 0, np.inf, np.abs(U / np.where(dU == 0, 1.0, dU)))
        mask = (dlam >= slope_threshold) | (lam >= length_ratio * ell)
    finite_ell = ell[np.isfinite(ell)]
    caution = bool(finite_ell.size and np.max(finite_ell) > grid.length)
    allowed = ~np.isnan(P)
    degenerate = bool(allowed.any() and np.all(P[allowed] == 0))
    return WKBDiagnostics(x, P, lam, dlam, ell, mask, caution, degenerate, (slope_threshold, length_ratio))


# --- Bohr-Sommerfeld ---------------------------------------------------------


class BSLevel(NamedTuple):
    n: int
    energy: float
    action_residual: float


class _Well:
    """The lowest well of ``H(x, 0)`` inside the domain, scanned once."""

    def __init__(self, h, n_scan=4097):
        self.h = h
        lo, hi = h.domain
        self.xs = np.linspace(lo, hi, n_scan)
        H0 = -_kinetic_margin(h, 0.0, self.xs)
        i = int(np.argmin(H0))
        if i == 0 or i == n_scan - 1:
            raise StructureError("H(x, 0) has no interior minimum in the domain: no well")
        res = minimize_scalar(
            lambda x: float(-_kinetic_margin(h, 0.0, x)),
            bounds=(self.xs[i - 1], self.xs[i + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        self.x_min = float(res.x) if res.fun <= H0[i] else float(self.xs[i])
        self.E_bottom = float(-_kinetic_margin(h, 0.0, self.x_min))
        self.i_min = i

    def edges(self, E):
        """Turning points enclosing the minimum, or ``None`` if the region leaks out."""
        xs = self.xs
        f = _kinetic_margin(self.h, E, xs)
        left = np.flatnonzero((xs < self.x_min) & (f < 0))
        right = np.flatnonzero((xs > self.x_min) & (f < 0))
        if left.size == 0 or right.size == 0:
            return None
        il, ir = int(left[-1]), int(right[0])
        # nodes strictly between il and ir are allowed, and so is x_min itself
        a_in = xs[il + 1] if xs[il + 1] < self.x_min else self.x_min
        b_in = xs[ir - 1] if xs[ir - 1] > self.x_min else self.x_min
        return _refine(self.h, E, xs[il], a_in), _refine(self.h, E, b_in, xs[ir])

    def action(self, E, rtol=1e-12):
        if E <= self.E_bottom:
            return 0.0
        edges = self.edges(E)
        if edges is None:
            raise StructureError(f"at E={float(E):.17g} the classically allowed region reaches the domain boundary")
        a, b = edges
        return _action_quadrature(self.h, E, a, b, rtol)


def bohr_sommerfeld_levels(h: HamiltonianSpec, n_min: int, n_max: int, maslov: float = 0.5,
                           tol: float = 1e-10) -> List[BSLevel]:
    """Quantized energies from ``2 * action(E) = 2 pi hbar (n + maslov)``.

    ``action_residual`` is ``2 action(E_n) / (2 pi hbar) - (n + maslov)``.
    Only the deepest well in ``h.domain`` is quantized.
    """
    if n_min > n_max:
        return []
    if n_min < 0:
        raise ConfigError("quantum numbers must be nonnegative")
    well = _Well(h)
    two_pi_hbar = 2.0 * math.pi * h.hbar

    def residual(E, n):
        return 2.0 * well.action(E) / two_pi_hbar - (n + maslov)

    levels = []
    lo = well.E_bottom
    step = 1e-3 * max(abs(well.E_bottom), 1.0)
    for n in range(n_min, n_max + 1):
        start = lo
        hi = lo + step
        prev_action = well.action(lo)
        for _ in range(200):
            act = well.action(hi)
            if act < prev_action:
                raise SolverError(f"action is not monotone in E near E={float(hi):.17g}")
            if 2.0 * act / two_pi_hbar - (n + maslov) > 0:
                break
            prev_action = act
            lo, hi = hi, hi + 2.0 * (hi - lo)
        else:
            raise SolverError(f"could not bracket level n={n}")
        E_n = brentq(residual, lo, hi, args=(n,), xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        r = residual(E_n, n)
        if abs(r) > tol:
            raise SolverError(f"level n={n} converged with residual {r:.3e} > {tol}")
        levels.append(BSLevel(n, float(E_n), float(r)))
        step = max(0.5 * (E_n - start), 1e-12 * max(abs(E_n), 1.0))
        lo = E_n
    return levels
