"""JSON run configuration: sections units, hamiltonian, grid, packet, omega, run."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .classical import OmegaSpec, omega_from_dict
from .errors import ConfigError
from .harness import Packet
from .model import Grid, HamiltonianSpec, UnitSystem, make_grid

KNOWN_SECTIONS = {"units", "hamiltonian", "grid", "packet", "omega", "run"}


@dataclass
class Config:
    hamiltonian: Optional[HamiltonianSpec] = None
    grid: Optional[Grid] = None
    packet: Optional[Packet] = None
    omega: Optional[OmegaSpec] = None
    run: dict = field(default_factory=dict)

    def require(self, name):
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"config section '{name}' is required for this command")
        return value


def config_from_dict(doc) -> Config:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - KNOWN_SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = Config(run=dict(doc.get("run", {})))
    if "hamiltonian" in doc:
        h = HamiltonianSpec.from_dict(doc["hamiltonian"])
        if "units" in doc:
            u = doc["units"]
            try:
                units = UnitSystem(hbar=float(u.get("hbar", h.hbar)), c=float(u.get("c", h.c)))
            except (TypeError, ValueError, AttributeError) as exc:
                raise ConfigError(f"malformed units section: {exc!r}") from exc
            h = replace(h, units=units)
        cfg.hamiltonian = h
    if "grid" in doc:
        g = doc["grid"]
        try:
            lo, hi = cfg.hamiltonian.domain if cfg.hamiltonian is not None else (None, None)
            cfg.grid = make_grid(g.get("xmin", lo), g.get("xmax", hi), g.get("n", 1024))
        except (TypeError, AttributeError) as exc:
            raise ConfigError(f"malformed grid section: {exc!r}") from exc
    elif cfg.hamiltonian is not None:
        cfg.grid = make_grid(*cfg.hamiltonian.domain, 1024)
    if "packet" in doc:
        p = doc["packet"]
        try:
            cfg.packet = Packet(float(p["x0"]), float(p.get("p0", 0.0)), float(p["width"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed packet section: {exc!r}") from exc
    if "omega" in doc:
        cfg.omega = omega_from_dict(doc["omega"])
    return cfg


def load_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_dict(doc)
