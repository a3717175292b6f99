"""Classical dynamics obtained by replacing operators with numbers.

Orbit: Hamilton's equations ``dx/dt = dH/dp``, ``dp/dt = -dH/dx`` for the
square-root Hamiltonian.  Spin: precession ``ds/dt = Omega x s`` of a
classical spin vector under a prescribed angular velocity ``Omega(t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, DomainError, IntegrationError, ModelError
from .model import HamiltonianSpec, eval_classical_hamiltonian

__all__ = [
    "PhasePoint",
    "Trajectory",
    "ConstantOmega",
    "TabulatedOmega",
    "hamilton_rhs",
    "integrate_trajectory",
    "spin_precession_classical",
    "omega_from_dict",
]


# local error is controlled to STEP_SAFETY * tol so that long runs keep the
# accumulated energy drift near tol per oscillation
STEP_SAFETY = 0.1


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float
    t: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite([self.x, self.p, self.t])):
            raise ConfigError(f"phase point must be finite: {self!r}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    H: np.ndarray
    energy_drift: float
    n_steps: int

    @property
    def samples(self):
        return [PhasePoint(float(a), float(b), float(c)) for c, a, b in zip(self.t, self.x, self.p)]

    @property
    def final(self):
        return PhasePoint(float(self.x[-1]), float(self.p[-1]), float(self.t[-1]))


# --- precession field --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConstantOmega:
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float).reshape(3)
        if not np.all(np.isfinite(v)):
            raise ConfigError("Omega must be finite")
        object.__setattr__(self, "vector", v)

    def __call__(self, t):
        return self.vector

    def knots(self, t0, t1):
        return np.array([t0, t1])

    def max_norm(self, t0=None, t1=None):
        return float(np.linalg.norm(self.vector))

    def to_dict(self):
        return {"type": "constant", "vector": self.vector.tolist()}


@dataclass(frozen=True, eq=False)
class TabulatedOmega:
    """Piecewise-linear ``Omega(t)`` through tabulated samples; no extrapolation."""

    times: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        v = np.asarray(self.vectors, dtype=float).reshape(-1, 3)
        if t.size < 2 or v.shape[0] != t.size:
            raise ConfigError("tabulated Omega needs at least two (t, vector) samples")
        if np.any(np.diff(t) <= 0):
            raise ConfigError("tabulated Omega times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ConfigError("tabulated Omega must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "vectors", v)

    def __call__(self, t):
        t0, t1 = self.times[0], self.times[-1]
        slack = 1e-12 * max(1.0, abs(t1 - t0))
        if t < t0 - slack or t > t1 + slack:
            raise DomainError(f"t={float(t):.17g} outside tabulated Omega range [{t0}, {t1}]")
        t = min(max(t, t0), t1)
        return np.array([np.interp(t, self.times, self.vectors[:, i]) for i in range(3)])

    def knots(self, t0, t1):
        inner = self.times[(self.times > t0) & (self.times < t1)]
        return np.concatenate(([t0], inner, [t1]))

    def max_norm(self, t0=None, t1=None):
        # piecewise linear: the maximum norm sits on a tabulation node
        return float(np.max(np.linalg.norm(self.vectors, axis=1)))

    def to_dict(self):
        return {"type": "tabulated", "t": self.times.tolist(), "vectors": self.vectors.tolist()}


OmegaSpec = Union[ConstantOmega, TabulatedOmega]


def omega_from_dict(doc) -> OmegaSpec:
    try:
        kind = doc.get("type", "constant")
        if kind == "constant":
            return ConstantOmega(doc["vector"])
        if kind == "tabulated":
            return TabulatedOmega(doc["t"], doc["vectors"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed omega section: {exc!r}") from exc
    raise ConfigError(f"unknown omega type {kind!r}")


# --- shared stepping ---------------------------------------------------------


def _integrate_through(fun, y0, breakpoints, rtol, atol):
    """RK5(4) across consecutive breakpoints; returns states exactly at each breakpoint.

    Restarting at breakpoints keeps sampled values free of dense-output
    interpolation error and lets kinks in a tabulated right-hand side fall on
    step boundaries.  Also returns every accepted step for drift checks.
    """
    y = np.asarray(y0, dtype=float)
    out = [y.copy()]
    steps_t = [breakpoints[0]]
    steps_y = [y.copy()]
    first_step = None
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        if b == a:
            out.append(y.copy())
            continue
        kwargs = {}
        if first_step is not None:
            kwargs["first_step"] = min(first_step, b - a)
        sol = solve_ivp(fun, (a, b), y, method="RK45", rtol=rtol, atol=atol, **kwargs)
        if sol.status != 0:
            raise IntegrationError(
                f"integration failed near t={float(sol.t[-1]):.17g}, y={sol.y[:, -1].tolist()}: {sol.message}",
                t=float(sol.t[-1]),
                y=sol.y[:, -1].copy(),
            )
        if sol.t.size > 2:
            first_step = float(sol.t[-2] - sol.t[-3]) if sol.t.size > 3 else float(sol.t[-1] - sol.t[-2])
        y = sol.y[:, -1].copy()
        out.append(y.copy())
        steps_t.extend(sol.t[1:].tolist())
        steps_y.extend(sol.y[:, 1:].T)
    return np.array(out), np.array(steps_t), np.array(steps_y)


# --- orbit -------------------------------------------------------------------


def hamilton_rhs(h: HamiltonianSpec, x: float, p: float):
    """``(dx/dt, dp/dt)`` from analytic partial derivatives of ``H``."""
    rad = float(h.radicand(x, p))
    if not rad > 0:
        raise ModelError(f"radicand {float(rad):.6g} <= 0 at x={float(x):.17g}, p={float(p):.17g}")
    root = np.sqrt(rad)
    dxdt = (h.c**2 * p + 0.5 * float(h.momentum_potential_dp(x, p))) / root
    dpdt = -0.5 * float(h.momentum_potential_dx(x, p)) / root - float(h.U.derivative(x))
    return dxdt, dpdt


def integrate_trajectory(
    h: HamiltonianSpec,
    start: PhasePoint,
    t_end: float,
    tol: float = 1e-10,
    n_samples: int = 201,
    max_energy_drift: Optional[float] = None,
) -> Trajectory:
    """Integrate Hamilton's equations from ``start`` over a duration ``t_end``.

    ``energy_drift`` is the largest relative deviation of ``H`` from its
    initial value over all accepted steps.
    """
    if not (1e-12 <= tol <= 1e-4):
        raise ConfigError(f"tol must lie in [1e-12, 1e-4], got {tol!r}")
    if t_end < 0:
        raise ConfigError("t_end must be nonnegative")
    t0 = start.t
    H0 = float(eval_classical_hamiltonian(h, start.x, start.p))
    if t_end == 0:
        one = np.array([t0])
        return Trajectory(one, np.array([start.x]), np.array([start.p]), np.array([H0]), 0.0, 0)

    def fun(t, y):
        return hamilton_rhs(h, y[0], y[1])

    t_samples = t0 + np.linspace(0.0, t_end, max(int(n_samples), 2))
    ys, steps_t, steps_y = _integrate_through(fun, [start.x, start.p], t_samples, STEP_SAFETY * tol, STEP_SAFETY * tol)
    H_steps = eval_classical_hamiltonian(h, steps_y[:, 0], steps_y[:, 1])
    denom = abs(H0) if H0 != 0 else 1.0
    drift = float(np.max(np.abs(H_steps - H0)) / denom)
    if max_energy_drift is not None and drift > max_energy_drift:
        raise IntegrationError(f"relative energy drift {drift:.3e} exceeds bound {max_energy_drift:.3e}",
                               t=float(steps_t[-1]), y=steps_y[-1])
    H = eval_classical_hamiltonian(h, ys[:, 0], ys[:, 1])
    return Trajectory(t_samples, ys[:, 0], ys[:, 1], np.asarray(H), drift, len(steps_t) - 1)


# --- spin precession ---------------------------------------------------------


def spin_precession_classical(omega: OmegaSpec, s0, t_end: float, tol: float = 1e-12, n_samples: int = 201,
                              t_eval=None):
    """Integrate ``ds/dt = Omega(t) x s`` from ``t = 0``; returns ``(t, s)`` with ``s`` of shape (n, 3).

    The vector is never renormalized; length conservation is left to the
    integrator tolerance.
    """
    s0 = np.asarray(s0, dtype=float).reshape(3)
    norm0 = float(np.linalg.norm(s0))
    if norm0 == 0:
        raise ConfigError("initial spin vector must be nonzero")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, max(int(n_samples), 2))
    t_eval = np.asarray(t_eval, dtype=float)
    knots = omega.knots(0.0, float(t_eval[-1]))
    breaks = np.union1d(t_eval, knots)

    def fun(t, s):
        return np.cross(omega(t), s)

    ys, _, _ = _integrate_through(fun, s0, breaks, tol, tol * norm0)
    idx = np.searchsorted(breaks, t_eval)
    return t_eval, ys[idx]
