import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwclassical.classical import (
    ConstantOmega,
    PhasePoint,
    TabulatedOmega,
    hamilton_rhs,
    integrate_trajectory,
    omega_from_dict,
    spin_precession_classical,
)
from fwclassical.errors import ConfigError, DomainError, IntegrationError, ModelError
from fwclassical.model import (
    Constant,
    HamiltonianSpec,
    Harmonic,
    MomentumTerm,
    PolynomialInX,
    UnitSystem,
    Zero,
    eval_classical_hamiltonian,
    tabulate,
)

FREE = HamiltonianSpec(1.0, UnitSystem(1.0, 1.0), Zero())
OSC = HamiltonianSpec(1.0, UnitSystem(1.0, 1.0), Harmonic(1.0))


def test_rhs_examples():
    vx, vp = hamilton_rhs(FREE, 0.0, 1.0)
    assert vx == pytest.approx(1 / math.sqrt(2), abs=1e-15) and vp == 0
    assert hamilton_rhs(HamiltonianSpec(0.0), 3.0, 2.5)[0] == 1.0
    assert hamilton_rhs(OSC, 2.0, 0.3)[1] == -2.0


def test_rhs_rejects_nonpositive_radicand():
    h = HamiltonianSpec(1.0, V=(MomentumTerm(0, Constant(-1.0)),))
    with pytest.raises(ModelError):
        hamilton_rhs(h, 0.0, 0.0)


RICH = HamiltonianSpec(
    1.3,
    UnitSystem(1.0, 1.7),
    PolynomialInX((0.1, -0.2, 0.4, 0.0, 0.05)),
    V=(MomentumTerm(0, Harmonic(0.3)), MomentumTerm(1, Constant(0.5)), MomentumTerm(2, Harmonic(0.1, 0.5))),
)
TAB = HamiltonianSpec(0.8, UnitSystem(1.0, 2.0), tabulate(lambda x: np.sin(x) + 0.1 * x**2, np.linspace(-5, 5, 201)))


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-3, 3), p=st.floats(-3, 3), which=st.sampled_from(["rich", "tab"]))
def test_partials_match_finite_differences(x, p, which):
    h = RICH if which == "rich" else TAB
    H = lambda a, b: float(eval_classical_hamiltonian(h, a, b))
    eps = 1e-6
    dHdp = (H(x, p + eps) - H(x, p - eps)) / (2 * eps)
    dHdx = (H(x + eps, p) - H(x - eps, p)) / (2 * eps)
    vx, vp = hamilton_rhs(h, x, p)
    tol = max(1e-8, 1e-6 * abs(H(x, p)))
    assert abs(vx - dHdp) <= tol
    assert abs(vp + dHdx) <= tol


def test_free_flight():
    traj = integrate_trajectory(FREE, PhasePoint(0.0, 1.0), math.sqrt(2))
    assert abs(traj.x[-1] - 1.0) < 1e-9
    assert traj.t[-1] == math.sqrt(2)


def test_ultra_relativistic_speed():
    traj = integrate_trajectory(FREE, PhasePoint(0.0, 100.0), 1.0)
    assert abs(traj.x[-1] - 100 / math.sqrt(10001)) < 1e-12
    assert traj.x[-1] < 1.0


def test_harmonic_energy_drift():
    traj = integrate_trajectory(OSC, PhasePoint(1.0, 0.5), 80.0, tol=1e-10)
    # more than ten oscillations of x
    crossings = np.sum(np.diff(np.sign(traj.x)) != 0)
    assert crossings >= 20
    assert traj.energy_drift <= 1e-9


def test_samples_and_final():
    traj = integrate_trajectory(OSC, PhasePoint(0.5, 0.0, t=2.0), 1.0, n_samples=11)
    assert np.allclose(traj.t, 2.0 + np.linspace(0, 1, 11))
    assert traj.samples[0] == PhasePoint(0.5, 0.0, 2.0)
    assert traj.final.t == 3.0
    assert np.all(np.diff(traj.t) > 0)
    zero = integrate_trajectory(OSC, PhasePoint(0.5, 0.1), 0.0)
    assert zero.x.tolist() == [0.5] and zero.energy_drift == 0.0


@pytest.mark.parametrize("h", [OSC, RICH], ids=["harmonic", "with-V"])
def test_time_reversal(h):
    tol = 1e-10
    fwd = integrate_trajectory(h, PhasePoint(0.7, -0.4), 3.0, tol=tol)
    back = integrate_trajectory(h, PhasePoint(fwd.x[-1], -fwd.p[-1]), 3.0, tol=tol)
    assert abs(back.x[-1] - 0.7) <= 10 * tol
    assert abs(-back.p[-1] - (-0.4)) <= 10 * tol


def test_speed_bound():
    h = HamiltonianSpec(1.0, UnitSystem(1.0, 2.0), Harmonic(4.0))
    traj = integrate_trajectory(h, PhasePoint(3.0, 0.0), 10.0, n_samples=2001)
    speeds = np.array([abs(hamilton_rhs(h, a, b)[0]) for a, b in zip(traj.x, traj.p)])
    assert speeds.max() < 2.0
    massless = HamiltonianSpec(0.0, UnitSystem(1.0, 2.0), Harmonic(1.0))
    assert abs(hamilton_rhs(massless, 0.3, 0.2)[0]) == 2.0


def test_reflection_symmetry():
    tol = 1e-10
    h = HamiltonianSpec(1.0, UnitSystem(1.0, 1.5), PolynomialInX((0, 0, 0.5, 0, 0.1)))
    a = integrate_trajectory(h, PhasePoint(0.9, 0.3), 6.0, tol=tol)
    b = integrate_trajectory(h, PhasePoint(-0.9, -0.3), 6.0, tol=tol)
    assert np.max(np.abs(a.x + b.x)) <= 10 * tol


def test_tolerance_range():
    for tol in (1e-13, 1e-3):
        with pytest.raises(ConfigError):
            integrate_trajectory(FREE, PhasePoint(0, 1), 1.0, tol=tol)


def test_drift_bound_failure_carries_location():
    with pytest.raises(IntegrationError) as info:
        integrate_trajectory(OSC, PhasePoint(1.0, 0.0), 5.0, tol=1e-4, max_energy_drift=1e-15)
    assert info.value.t is not None and info.value.y is not None


def test_phase_point_must_be_finite():
    with pytest.raises(ConfigError):
        PhasePoint(float("nan"), 0.0)


# --- spin precession --------------------------------------------------------------


def test_precession_about_z():
    w = 1.7
    t, s = spin_precession_classical(ConstantOmega([0, 0, w]), [1, 0, 0], 5.0)
    expected = np.stack([np.cos(w * t), np.sin(w * t), 0 * t], axis=1)
    assert np.max(np.abs(s - expected)) < 1e-9


def test_parallel_field_leaves_spin_fixed():
    t, s = spin_precession_classical(ConstantOmega([0.3, -0.2, 0.9]), [0.6, -0.4, 1.8], 10.0)
    assert np.max(np.abs(s - [0.6, -0.4, 1.8])) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_length_conserved_for_tabulated_field(seed):
    rng = np.random.default_rng(seed)
    omega = TabulatedOmega(np.linspace(0, 10, 41), rng.normal(size=(41, 3)))
    s0 = rng.normal(size=3)
    t, s = spin_precession_classical(omega, s0, 10.0)
    assert np.max(np.abs(np.linalg.norm(s, axis=1) - np.linalg.norm(s0))) < 1e-10


def test_tabulated_omega_rules():
    om = TabulatedOmega([0.0, 1.0, 2.0], [[0, 0, 0], [0, 0, 2], [0, 0, 0]])
    assert np.allclose(om(0.5), [0, 0, 1])
    assert om.max_norm() == 2.0
    with pytest.raises(DomainError):
        om(2.5)
    with pytest.raises(ConfigError):
        TabulatedOmega([0.0, 0.0], [[0, 0, 1], [0, 0, 1]])
    with pytest.raises(DomainError):
        spin_precession_classical(om, [1, 0, 0], 3.0)
    assert omega_from_dict(om.to_dict()).times.tolist() == [0.0, 1.0, 2.0]
    assert omega_from_dict({"vector": [1, 2, 3]}).vector.tolist() == [1, 2, 3]
    with pytest.raises(ConfigError):
        omega_from_dict({"type": "spiral"})


def test_zero_spin_rejected():
    with pytest.raises(ConfigError):
        spin_precession_classical(ConstantOmega([0, 0, 1]), [0, 0, 0], 1.0)
