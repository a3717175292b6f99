import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwclassical.errors import ConfigError, DomainError, ModelError
from fwclassical.model import (
    Constant,
    HamiltonianSpec,
    Harmonic,
    Linear,
    MomentumTerm,
    PolynomialInX,
    Tabulated,
    UnitSystem,
    Zero,
    eval_classical_hamiltonian,
    eval_potential,
    make_grid,
    potential_from_dict,
    potential_to_dict,
    tabulate,
)


def test_harmonic_value():
    assert eval_potential(Harmonic(k=1, x0=0), 1.0) == 0.5


def test_zero_value():
    assert eval_potential(Zero(), 7.3) == 0.0


def test_tabulated_sine_interpolation():
    xs = np.linspace(0.0, 2 * np.pi, 64)
    pot = tabulate(np.sin, xs)
    assert abs(eval_potential(pot, np.pi / 2) - 1.0) < 1e-6
    # against the analytic function over the whole range
    probe = np.linspace(0.0, 2 * np.pi, 1001)
    assert np.max(np.abs(pot(probe) - np.sin(probe))) < 1e-5


def test_tabulated_rejects_extrapolation():
    pot = tabulate(np.sin, np.linspace(0, 1, 8))
    with pytest.raises(DomainError):
        eval_potential(pot, 1.5)
    with pytest.raises(DomainError):
        pot.derivative(-0.1)


def test_tabulated_requires_increasing_samples():
    with pytest.raises(ConfigError):
        Tabulated((0.0, 1.0, 1.0, 2.0), (0.0, 1.0, 2.0, 3.0))


def test_other_catalog_forms():
    assert eval_potential(Constant(2.5), -3.0) == 2.5
    assert eval_potential(Linear(2.0), 1.5) == 3.0
    assert eval_potential(PolynomialInX((1.0, 0.0, 3.0)), 2.0) == 13.0
    assert PolynomialInX((1.0, 0.0, 3.0)).derivative(2.0) == 12.0
    assert Harmonic(2.0, 1.0).derivative(3.0) == 4.0


@pytest.mark.parametrize(
    "m, U, x, p, expected",
    [
        (1.0, Zero(), 0.0, 0.0, 1.0),
        (0.0, Zero(), 0.0, 2.0, 2.0),
        (1.0, Harmonic(1.0, 0.0), 1.0, 0.0, 1.5),
    ],
)
def test_classical_hamiltonian_examples(m, U, x, p, expected):
    h = HamiltonianSpec(m, UnitSystem(1.0, 1.0), U)
    assert eval_classical_hamiltonian(h, x, p) == pytest.approx(expected, abs=1e-15)


def test_negative_radicand_names_point():
    h = HamiltonianSpec(1.0, V=(MomentumTerm(0, Constant(-5.0)),))
    with pytest.raises(ModelError, match="x=0.25"):
        eval_classical_hamiltonian(h, 0.25, 0.5)


def test_make_grid_examples():
    assert make_grid(-10, 10, 16).dx == 1.25
    g = make_grid(0, 1, 8)
    assert g.x[0] == 0.0 and g.x[7] == 0.875
    g = make_grid(-5, 5, 1024)
    assert abs(np.max(np.abs(g.k)) - np.pi / g.dx) < 1e-12


@pytest.mark.parametrize("args", [(0, 1, 12), (0, 1, 4), (1, 0, 16), (0, 0, 16), (0, 1, 8.5)])
def test_make_grid_rejects(args):
    with pytest.raises(ConfigError):
        make_grid(*args)


def test_units_must_be_positive():
    with pytest.raises(ConfigError):
        UnitSystem(hbar=0.0)
    with pytest.raises(ConfigError):
        UnitSystem(c=float("inf"))


def _spec_with(V, U=None):
    return HamiltonianSpec(1.3, UnitSystem(1.0, 1.7), U or Harmonic(0.8, 0.2), V=V)


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(x=finite, p=finite, a=st.floats(0, 2), b=st.floats(0, 0.5))
def test_even_in_momentum(x, p, a, b):
    h = _spec_with((MomentumTerm(1, Constant(a)), MomentumTerm(2, Harmonic(b))))
    assert eval_classical_hamiltonian(h, x, p) == eval_classical_hamiltonian(h, x, -p)


@settings(max_examples=60, deadline=None)
@given(x=finite, p1=st.floats(0, 5), p2=st.floats(0, 5), a=st.floats(0, 2), b=st.floats(0, 0.5))
def test_monotone_in_abs_momentum(x, p1, p2, a, b):
    h = _spec_with((MomentumTerm(1, Constant(a)), MomentumTerm(2, Constant(b))))
    lo, hi = sorted((p1, p2))
    assert eval_classical_hamiltonian(h, x, lo) <= eval_classical_hamiltonian(h, x, hi)


@settings(max_examples=60, deadline=None)
@given(x=finite, p=finite, u=st.floats(-10, 10))
def test_constant_potential_shift(x, p, u):
    base = HamiltonianSpec(1.0, U=Zero())
    shifted = HamiltonianSpec(1.0, U=Constant(u))
    diff = eval_classical_hamiltonian(shifted, x, p) - eval_classical_hamiltonian(base, x, p)
    assert diff == pytest.approx(u, abs=1e-12)


def test_hamiltonian_json_round_trip():
    h = HamiltonianSpec(
        2.0,
        UnitSystem(0.5, 3.0),
        Harmonic(1.5, -0.25),
        V=(MomentumTerm(0, Constant(0.3)), MomentumTerm(1, tabulate(np.cos, np.linspace(-3, 3, 9)))),
        domain=(-3.0, 3.0),
    )
    doc = json.loads(h.to_json())
    assert set(doc) == {"mass", "hbar", "c", "U", "V", "domain"}
    back = HamiltonianSpec.from_json(h.to_json())
    assert back == h
    for pot in (Zero(), Constant(1.0), Linear(-2.0), Harmonic(3.0, 1.0), PolynomialInX((1, 2, 3))):
        assert potential_from_dict(potential_to_dict(pot)) == pot


def test_malformed_documents():
    with pytest.raises(ConfigError):
        HamiltonianSpec.from_json("{not json")
    with pytest.raises(ConfigError):
        HamiltonianSpec.from_dict({"U": {"type": "zero"}})
    with pytest.raises(ConfigError):
        potential_from_dict({"type": "wiggly"})
    with pytest.raises(ConfigError):
        potential_from_dict({"type": "harmonic"})


def test_domain_and_mass_validation():
    with pytest.raises(ConfigError):
        HamiltonianSpec(-1.0)
    with pytest.raises(ConfigError):
        HamiltonianSpec(1.0, domain=(1.0, -1.0))
    with pytest.raises(ConfigError):
        MomentumTerm(-1, Zero())


def test_vectorized_evaluation_matches_scalar():
    h = _spec_with((MomentumTerm(1, Constant(0.4)),))
    xs = np.linspace(-2, 2, 7)
    ps = np.linspace(-1, 1, 7)
    vec = eval_classical_hamiltonian(h, xs, ps)
    assert np.allclose(vec, [eval_classical_hamiltonian(h, a, b) for a, b in zip(xs, ps)], rtol=0, atol=1e-15)
    assert math.isfinite(float(vec[0]))
