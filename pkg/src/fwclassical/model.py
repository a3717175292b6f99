"""Physical system definition: units, potentials, the square-root Hamiltonian.

The Hamiltonian handled throughout the package is

    H(x, p) = sqrt(m^2 c^4 + c^2 p^2 + V(x, p)) + U(x)

with ``U`` a scalar potential and ``V`` a finite sum of even powers of the
momentum with position-dependent coefficients,
``V(x, p) = sum_k c_k(x) p^(2k)``.  Only the positive branch of the root is
ever taken.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DomainError, ModelError

__all__ = [
    "UnitSystem",
    "Zero",
    "Constant",
    "Linear",
    "Harmonic",
    "PolynomialInX",
    "Tabulated",
    "MomentumTerm",
    "HamiltonianSpec",
    "Grid",
    "eval_potential",
    "eval_potential_derivative",
    "eval_classical_hamiltonian",
    "make_grid",
    "potential_from_dict",
    "potential_to_dict",
]


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")


# --- scalar potentials -------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))[()]

    def derivative(self, x):
        return self(x)


@dataclass(frozen=True)
class Constant:
    v: float

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.v)[()]

    def derivative(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))[()]


@dataclass(frozen=True)
class Linear:
    """``a * x``."""

    a: float

    def __call__(self, x):
        return (self.a * np.asarray(x, dtype=float))[()]

    def derivative(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.a)[()]


@dataclass(frozen=True)
class Harmonic:
    """``k (x - x0)^2 / 2``."""

    k: float
    x0: float = 0.0

    def __call__(self, x):
        d = np.asarray(x, dtype=float) - self.x0
        return (0.5 * self.k * d * d)[()]

    def derivative(self, x):
        return (self.k * (np.asarray(x, dtype=float) - self.x0))[()]


@dataclass(frozen=True)
class PolynomialInX:
    """``coeffs[0] + coeffs[1] x + coeffs[2] x^2 + ...`` (ascending powers)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @cached_property
    def _poly(self):
        return np.polynomial.Polynomial(self.coeffs or (0.0,))

    def __call__(self, x):
        return np.asarray(self._poly(np.asarray(x, dtype=float)), dtype=float)[()]

    def derivative(self, x):
        return np.asarray(self._poly.deriv()(np.asarray(x, dtype=float)), dtype=float)[()]


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Natural cubic spline through ``(xs, values)``; no extrapolation."""

    xs: tuple
    values: tuple
    interpolation: str = "cubic"

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.values, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 4:
            raise ConfigError("Tabulated potential needs matching 1-D samples (at least 4)")
        if np.any(np.diff(xs) <= 0):
            raise ConfigError("Tabulated x samples must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ConfigError("Tabulated samples must be finite")
        if self.interpolation != "cubic":
            raise ConfigError(f"unsupported interpolation {self.interpolation!r}")
        object.__setattr__(self, "xs", tuple(xs.tolist()))
        object.__setattr__(self, "values", tuple(ys.tolist()))

    @cached_property
    def _spline(self):
        return CubicSpline(np.asarray(self.xs), np.asarray(self.values), bc_type="natural", extrapolate=False)

    @cached_property
    def _dspline(self):
        return self._spline.derivative()

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.xs[0]) or np.any(x > self.xs[-1]) or np.any(np.isnan(x)):
            bad = x[(x < self.xs[0]) | (x > self.xs[-1]) | np.isnan(x)]
            raise DomainError(
                f"x={float(bad.ravel()[0]):.17g} outside tabulated range [{self.xs[0]}, {self.xs[-1]}]"
            )
        return x

    def __call__(self, x):
        return np.asarray(self._spline(self._check(x)), dtype=float)[()]

    def derivative(self, x):
        return np.asarray(self._dspline(self._check(x)), dtype=float)[()]

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and self.xs == other.xs
            and self.values == other.values
            and self.interpolation == other.interpolation
        )

    def __hash__(self):
        return hash((self.xs, self.values, self.interpolation))


Potential = Union[Zero, Constant, Linear, Harmonic, PolynomialInX, Tabulated]


def eval_potential(pot: Potential, x):
    """Evaluate a scalar potential at ``x`` (scalar or array)."""
    value = pot(x)
    if not np.all(np.isfinite(value)):
        raise DomainError(f"potential {pot!r} is not finite at the requested points")
    return value


def eval_potential_derivative(pot: Potential, x):
    return pot.derivative(x)


# --- Hamiltonian -------------------------------------------------------------


@dataclass(frozen=True)
class MomentumTerm:
    """One term ``coeff(x) * p^(2 * power)`` of the momentum-dependent potential."""

    power: int
    coeff: Potential

    def __post_init__(self):
        if int(self.power) != self.power or self.power < 0:
            raise ConfigError(f"momentum power index must be a nonnegative integer, got {self.power!r}")
        object.__setattr__(self, "power", int(self.power))


@dataclass(frozen=True)
class HamiltonianSpec:
    mass: float
    units: UnitSystem = field(default_factory=UnitSystem)
    U: Potential = field(default_factory=Zero)
    V: tuple = ()
    domain: tuple = (-10.0, 10.0)

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass >= 0):
            raise ConfigError(f"mass must be finite and nonnegative, got {self.mass!r}")
        V = tuple(t if isinstance(t, MomentumTerm) else MomentumTerm(*t) for t in self.V)
        object.__setattr__(self, "V", V)
        lo, hi = (float(v) for v in self.domain)
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ConfigError(f"domain must satisfy xmin < xmax, got {self.domain!r}")
        object.__setattr__(self, "domain", (lo, hi))

    @property
    def hbar(self):
        return self.units.hbar

    @property
    def c(self):
        return self.units.c

    @property
    def rest_energy(self):
        return self.mass * self.c**2

    @property
    def has_momentum_potential(self):
        return len(self.V) > 0

    def with_hbar(self, hbar):
        return replace(self, units=replace(self.units, hbar=hbar))

    def max_power(self):
        return max((t.power for t in self.V), default=0)

    def static_part(self, x):
        """``m^2 c^4 + V(x, 0)``: the radicand at zero momentum."""
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.rest_energy**2)
        for term in self.V:
            if term.power == 0:
                out = out + eval_potential(term.coeff, x)
        return out[()]

    def momentum_coefficients(self, x):
        """Coefficients of ``u, u^2, ...`` (``u = p^2``) in ``c^2 u + V``, shape ``(len(x), K)``.

        The ``c^2`` of the kinetic term is *not* included.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        K = self.max_power()
        out = np.zeros((x.size, K))
        for term in self.V:
            if term.power >= 1:
                out[:, term.power - 1] += eval_potential(term.coeff, x)
        return out

    def momentum_potential(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        out = np.zeros(np.broadcast(x, p).shape)
        for term in self.V:
            out = out + eval_potential(term.coeff, x) * p ** (2 * term.power)
        return out[()]

    def momentum_potential_dp(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        out = np.zeros(np.broadcast(x, p).shape)
        for term in self.V:
            if term.power >= 1:
                k = term.power
                out = out + 2 * k * eval_potential(term.coeff, x) * p ** (2 * k - 1)
        return out[()]

    def momentum_potential_dx(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        out = np.zeros(np.broadcast(x, p).shape)
        for term in self.V:
            out = out + term.coeff.derivative(x) * p ** (2 * term.power)
        return out[()]

    def radicand(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return (self.rest_energy**2 + self.c**2 * p * p + self.momentum_potential(x, p))

    # JSON document {mass, hbar, c, U, V, domain}
    def to_dict(self):
        return {
            "mass": self.mass,
            "hbar": self.hbar,
            "c": self.c,
            "U": potential_to_dict(self.U),
            "V": [{"power": t.power, "coeff": potential_to_dict(t.coeff)} for t in self.V],
            "domain": list(self.domain),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            units = UnitSystem(hbar=float(doc.get("hbar", 1.0)), c=float(doc.get("c", 1.0)))
            V = tuple(
                MomentumTerm(int(t["power"]), potential_from_dict(t["coeff"])) for t in doc.get("V", [])
            )
            return cls(
                mass=float(doc["mass"]),
                units=units,
                U=potential_from_dict(doc.get("U", {"type": "zero"})),
                V=V,
                domain=tuple(doc.get("domain", (-10.0, 10.0))),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed Hamiltonian document: {exc!r}") from exc

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)


def eval_classical_hamiltonian(h: HamiltonianSpec, x, p):
    """Classical energy ``sqrt(m^2 c^4 + c^2 p^2 + V(x, p)) + U(x)``.

    Accepts scalars or broadcastable arrays.  Raises :class:`ModelError` if
    the radicand is negative anywhere.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    rad = h.radicand(x, p)
    if np.any(rad < 0):
        xb, pb = np.broadcast_arrays(x, p)
        i = np.flatnonzero(np.asarray(rad).ravel() < 0)[0]
        raise ModelError(
            f"negative radicand {np.asarray(rad).ravel()[i]:.3e} at x={float(xb.ravel()[i])!r}, p={float(pb.ravel()[i])!r}"
        )
    return (np.sqrt(rad) + eval_potential(h.U, x))[()]


# --- grid --------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid, left-closed: ``x_j = xmin + j dx`` for ``j < n``."""

    n: int
    xmin: float
    xmax: float

    @property
    def dx(self):
        return (self.xmax - self.xmin) / self.n

    @property
    def length(self):
        return self.xmax - self.xmin

    @cached_property
    def x(self):
        return self.xmin + self.dx * np.arange(self.n)

    @cached_property
    def k(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


def make_grid(xmin, xmax, n) -> Grid:
    xmin, xmax = float(xmin), float(xmax)
    if not (math.isfinite(xmin) and math.isfinite(xmax)) or xmax <= xmin:
        raise ConfigError(f"grid bounds must satisfy xmin < xmax, got ({xmin}, {xmax})")
    if int(n) != n or n < 8 or (int(n) & (int(n) - 1)):
        raise ConfigError(f"grid size must be a power of two >= 8, got {n!r}")
    return Grid(int(n), xmin, xmax)


# --- JSON helpers for potentials ---------------------------------------------


def potential_to_dict(pot: Potential) -> dict:
    if isinstance(pot, Zero):
        return {"type": "zero"}
    if isinstance(pot, Constant):
        return {"type": "constant", "v": pot.v}
    if isinstance(pot, Linear):
        return {"type": "linear", "a": pot.a}
    if isinstance(pot, Harmonic):
        return {"type": "harmonic", "k": pot.k, "x0": pot.x0}
    if isinstance(pot, PolynomialInX):
        return {"type": "polynomial", "coeffs": list(pot.coeffs)}
    if isinstance(pot, Tabulated):
        return {"type": "tabulated", "x": list(pot.xs), "values": list(pot.values),
                "interpolation": pot.interpolation}
    raise ConfigError(f"unknown potential {pot!r}")


def potential_from_dict(doc) -> Potential:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError(f"potential must be an object with a 'type' key, got {doc!r}")
    kind = str(doc["type"]).lower()
    try:
        if kind == "zero":
            return Zero()
        if kind == "constant":
            return Constant(float(doc["v"]))
        if kind == "linear":
            return Linear(float(doc["a"]))
        if kind == "harmonic":
            return Harmonic(float(doc["k"]), float(doc.get("x0", 0.0)))
        if kind in ("polynomial", "polynomialinx"):
            return PolynomialInX(tuple(doc["coeffs"]))
        if kind == "tabulated":
            return Tabulated(tuple(doc["x"]), tuple(doc["values"]), doc.get("interpolation", "cubic"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed {kind} potential: {exc!r}") from exc
    raise ConfigError(f"unknown potential type {doc['type']!r}")


def as_potential(obj) -> Potential:
    if isinstance(obj, (Zero, Constant, Linear, Harmonic, PolynomialInX, Tabulated)):
        return obj
    if isinstance(obj, dict):
        return potential_from_dict(obj)
    if isinstance(obj, (int, float)):
        return Constant(float(obj))
    raise ConfigError(f"cannot interpret {obj!r} as a potential")


def tabulate(fn, xs: Sequence[float]) -> Tabulated:
    xs = np.asarray(xs, dtype=float)
    return Tabulated(tuple(xs), tuple(np.asarray(fn(xs), dtype=float)))
