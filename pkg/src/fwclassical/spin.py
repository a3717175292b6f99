"""Spin matrices for arbitrary spin and the polarization vector/tensor.

Basis convention: ``|S, m>`` with ``m`` descending from ``S`` to ``-S``, so
``s_z = diag(S, S-1, ..., -S)``.

Polarization observables of a normalized amplitude vector ``chi``::

    P_i  = <s_i> / S
    P_ij = (3 <s_i s_j + s_j s_i> - 2 S (S+1) delta_ij) / (2 S (2S - 1))

The tensor only exists for ``S >= 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ConfigError, StateError

__all__ = [
    "SpinQuantum",
    "SpinMatrices",
    "SpinState",
    "Polarization",
    "spin_matrices",
    "polarization_vector",
    "polarization_tensor",
    "polarization",
    "rotation_matrix",
    "rotate_state",
]

NORM_TOL = 1e-8


@dataclass(frozen=True)
class SpinQuantum:
    two_s: int

    def __post_init__(self):
        if int(self.two_s) != self.two_s or self.two_s < 0:
            raise ConfigError(f"two_s must be a nonnegative integer, got {self.two_s!r}")
        object.__setattr__(self, "two_s", int(self.two_s))

    @classmethod
    def from_spin(cls, S):
        two_s = round(2 * S)
        if abs(two_s - 2 * S) > 1e-12:
            raise ConfigError(f"spin must be integer or half-integer, got {S!r}")
        return cls(two_s)

    @property
    def S(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def m_values(self):
        return self.S - np.arange(self.dim)


def _as_spin(spin) -> SpinQuantum:
    if isinstance(spin, SpinQuantum):
        return spin
    return SpinQuantum.from_spin(spin)


@dataclass(frozen=True, eq=False)
class SpinMatrices:
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    spin: SpinQuantum

    def __getitem__(self, i):
        return (self.sx, self.sy, self.sz)[i]

    def __iter__(self):
        return iter((self.sx, self.sy, self.sz))

    def product(self, i, j):
        """``s_i @ s_j``; building block for Hamiltonians quadratic in spin."""
        return self[i] @ self[j]

    def anticommutator(self, i, j):
        return self[i] @ self[j] + self[j] @ self[i]

    def dot(self, vec):
        """``n . s`` for a real 3-vector ``n``."""
        vx, vy, vz = (float(v) for v in vec)
        return vx * self.sx + vy * self.sy + vz * self.sz

    def casimir(self):
        return self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz


@lru_cache(maxsize=64)
def _ladder(two_s):
    spin = SpinQuantum(two_s)
    S = spin.S
    m = spin.m_values
    # <m+1| s_+ |m> = sqrt(S(S+1) - m(m+1)), on the superdiagonal for descending m
    splus = np.diag(np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    sminus = splus.conj().T
    sx = 0.5 * (splus + sminus)
    sy = -0.5j * (splus - sminus)
    sz = np.diag(m).astype(complex)
    for a in (sx, sy, sz):
        a.setflags(write=False)
    return SpinMatrices(sx, sy, sz, spin)


def spin_matrices(spin) -> SpinMatrices:
    """Spin matrices for ``spin`` (a :class:`SpinQuantum` or the number ``S``)."""
    spin = _as_spin(spin)
    if spin.two_s < 1:
        raise ConfigError("spin 0 has no spin matrices")
    return _ladder(spin.two_s)


@dataclass(frozen=True, eq=False)
class SpinState:
    amplitudes: np.ndarray
    spin: SpinQuantum

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        spin = _as_spin(self.spin)
        if amps.size != spin.dim:
            raise ConfigError(f"expected {spin.dim} amplitudes for S={spin.S}, got {amps.size}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "spin", spin)

    @property
    def norm(self):
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def normalized(self):
        n = self.norm
        if n == 0:
            raise StateError("cannot normalize the zero vector")
        return SpinState(self.amplitudes / n, self.spin)

    @classmethod
    def basis(cls, spin, m):
        """The eigenstate ``|S, m>`` of ``s_z``."""
        spin = _as_spin(spin)
        idx = round(spin.S - m)
        if not 0 <= idx < spin.dim or abs(spin.S - m - idx) > 1e-12:
            raise ConfigError(f"m={m} is not allowed for S={spin.S}")
        amps = np.zeros(spin.dim, dtype=complex)
        amps[idx] = 1.0
        return cls(amps, spin)

    @classmethod
    def stretched(cls, spin):
        spin = _as_spin(spin)
        return cls.basis(spin, spin.S)

    @classmethod
    def coherent(cls, spin, direction):
        """Stretched state along ``direction`` (polarization vector = unit direction)."""
        spin = _as_spin(spin)
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        theta = np.arctan2(np.hypot(n[0], n[1]), n[2])
        phi = np.arctan2(n[1], n[0])
        chi = cls.stretched(spin)
        chi = rotate_state(chi, (0.0, 1.0, 0.0), theta)
        return rotate_state(chi, (0.0, 0.0, 1.0), phi)

    @classmethod
    def random(cls, spin, rng):
        spin = _as_spin(spin)
        amps = rng.normal(size=spin.dim) + 1j * rng.normal(size=spin.dim)
        return cls(amps / np.linalg.norm(amps), spin)

    # JSON: {"two_s": int, "amplitudes": [[re, im], ...]}
    def to_dict(self):
        return {
            "two_s": self.spin.two_s,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            raw = doc["amplitudes"]
            spin = SpinQuantum(int(doc["two_s"]))
            flat = np.asarray(raw, dtype=float).ravel()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed spin state: {exc!r}") from exc
        if flat.size % 2:
            raise ConfigError("spin amplitudes must be (re, im) pairs")
        return cls(flat[0::2] + 1j * flat[1::2], spin)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class Polarization:
    vector: np.ndarray
    tensor: Optional[np.ndarray]


def _checked(state: SpinState):
    if abs(state.norm - 1.0) > NORM_TOL:
        raise StateError(f"spin state norm {state.norm!r} deviates from 1 by more than {NORM_TOL}")
    return state.amplitudes


def _expect(chi, op):
    return np.vdot(chi, op @ chi)


def polarization_vector(state: SpinState) -> np.ndarray:
    chi = _checked(state)
    mats = spin_matrices(state.spin)
    vals = np.array([_expect(chi, s) for s in mats])
    return vals.real / state.spin.S


def polarization_tensor(state: SpinState) -> np.ndarray:
    chi = _checked(state)
    spin = state.spin
    if spin.two_s < 2:
        raise ConfigError("the polarization tensor is undefined for S = 1/2")
    S = spin.S
    mats = spin_matrices(spin)
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            anti = _expect(chi, mats.anticommutator(i, j)).real
            out[i, j] = out[j, i] = 3.0 * anti - (2.0 * S * (S + 1) if i == j else 0.0)
    return out / (2.0 * S * (2.0 * S - 1.0))


def polarization(state: SpinState) -> Polarization:
    tensor = polarization_tensor(state) if state.spin.two_s >= 2 else None
    return Polarization(polarization_vector(state), tensor)


def rotation_matrix(axis, angle) -> np.ndarray:
    """Rodrigues formula: active right-handed rotation by ``angle`` about ``axis``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    K = np.array([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotation_operator(spin, axis, angle) -> np.ndarray:
    """``exp(-i angle n.s)`` via the eigendecomposition of ``n.s``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    gen = spin_matrices(spin).dot(n)
    evals, evecs = np.linalg.eigh(gen)
    return (evecs * np.exp(-1j * angle * evals)) @ evecs.conj().T


def rotate_state(state: SpinState, axis, angle) -> SpinState:
    U = rotation_operator(state.spin, axis, angle)
    return SpinState(U @ state.amplitudes, state.spin)
