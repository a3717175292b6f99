import math

import numpy as np
import pytest
from scipy.integrate import simpson

from fwclassical.errors import DomainError, SolverError, StructureError
from fwclassical.model import (
    Constant,
    HamiltonianSpec,
    Harmonic,
    Linear,
    MomentumTerm,
    PolynomialInX,
    UnitSystem,
    Zero,
    eval_classical_hamiltonian,
    make_grid,
    tabulate,
)
from fwclassical.wkb import (
    action_integral,
    allowed_intervals,
    bohr_sommerfeld_levels,
    generalized_momentum,
    momentum_profile,
    solve_wkb,
    total_action,
    turning_points,
    wkb_phase,
    wkb_validity,
    wkb_wavefunction,
)

FREE = HamiltonianSpec(1.0, UnitSystem(1.0, 1.0), Zero())
OSC = HamiltonianSpec(1.0, UnitSystem(1.0, 1.0), Harmonic(1.0, 0.0), domain=(-3.0, 3.0))


def osc_momentum(x, E=1.5):
    """Closed-form V = 0 inversion for the unit oscillator."""
    return np.sqrt((E - 0.5 * np.asarray(x) ** 2) ** 2 - 1.0)


# --- generalized momentum ----------------------------------------------------


def test_free_inversion():
    assert generalized_momentum(FREE, math.sqrt(2), 3.7) == pytest.approx(1.0, rel=1e-12)


def test_harmonic_inversion():
    assert abs(generalized_momentum(OSC, 1.5, 0.0) - math.sqrt(1.25)) < 1e-10


def test_forbidden_is_absent():
    h = HamiltonianSpec(1.0, U=Constant(0.5))
    assert generalized_momentum(h, 1.0, 0.3) is None
    assert generalized_momentum(h, -4.0, 0.3) is None


def test_non_monotone_residual_is_an_error():
    # u + c_4 u^2 with c_4 < 0 peaks below the required value
    h = HamiltonianSpec(1.0, V=(MomentumTerm(2, Constant(-0.3)),))
    with pytest.raises(SolverError, match="x=0.5"):
        generalized_momentum(h, 3.0, 0.5)


def test_profile_matches_closed_form():
    xs = np.linspace(-1.7, 1.7, 301)
    P = momentum_profile(OSC, 1.5, xs)
    inside = np.abs(xs) < 1
    assert np.all(np.isnan(P[~inside]))
    assert np.max(np.abs(P[inside] - osc_momentum(xs[inside]))) < 1e-12


def _random_spec(rng, kind):
    U = {
        "zero": Zero(),
        "constant": Constant(rng.uniform(-1, 1)),
        "linear": Linear(rng.uniform(-1, 1)),
        "harmonic": Harmonic(rng.uniform(0.2, 2), rng.uniform(-0.5, 0.5)),
        "polynomial": PolynomialInX((0.0, rng.uniform(-0.3, 0.3), rng.uniform(0.1, 1), 0.0, 0.05)),
        "tabulated": tabulate(lambda x: 0.3 * np.cos(x), np.linspace(-3, 3, 41)),
    }[kind]
    V = ()
    if rng.uniform() < 0.7:
        V = (MomentumTerm(1, Constant(rng.uniform(0, 1))), MomentumTerm(2, Harmonic(rng.uniform(0, 0.2))))
    return HamiltonianSpec(rng.uniform(0.5, 2), UnitSystem(1.0, rng.uniform(0.5, 3)), U, V=V, domain=(-3.0, 3.0))


KINDS = ["zero", "constant", "linear", "harmonic", "polynomial", "tabulated"]


@pytest.mark.parametrize("kind", KINDS)
def test_round_trip(kind):
    rng = np.random.default_rng(1000 + KINDS.index(kind))
    xs = np.linspace(-3, 3, 257)
    for _ in range(20):
        h = _random_spec(rng, kind)
        E = float(eval_classical_hamiltonian(h, rng.uniform(-1, 1), rng.uniform(-2, 2)))
        P = momentum_profile(h, E, xs)
        ok = ~np.isnan(P)
        assert ok.any()
        assert np.all(P[ok] >= 0)
        back = eval_classical_hamiltonian(h, xs[ok], P[ok])
        assert np.max(np.abs(back - E)) <= 1e-10 * max(1.0, abs(E))


# --- turning points and intervals ----------------------------------------------


def test_harmonic_turning_points():
    tps = turning_points(OSC, 1.5)
    assert len(tps) == 2
    assert abs(tps[0] + 1) < 1e-9 and abs(tps[1] - 1) < 1e-9


def test_turning_points_have_vanishing_momentum():
    h = HamiltonianSpec(1.2, UnitSystem(1.0, 2.0), PolynomialInX((0, 0.2, 1.0, 0, 0.1)),
                        V=(MomentumTerm(1, Constant(0.4)),), domain=(-4.0, 4.0))
    for E in (5.0, 6.5, 9.0):
        tps = turning_points(h, E)
        assert len(tps) == 2
        for x in tps:
            P = generalized_momentum(h, E, x)
            assert P is None or abs(P) <= 1e-10


def test_free_particle_has_no_turning_points():
    assert turning_points(FREE, 2.0) == []


def test_rest_energy_degenerate():
    assert turning_points(FREE, 1.0) == []
    diag = wkb_validity(FREE, 1.0, make_grid(-5, 5, 64))
    assert diag.degenerate
    assert np.all(diag.momentum == 0)


def test_symmetric_turning_points():
    for U in (Harmonic(0.7), PolynomialInX((0, 0, 0.5, 0, 0.2)), tabulate(lambda x: 0.2 * x**2, np.linspace(-4, 4, 81))):
        h = HamiltonianSpec(1.0, UnitSystem(1.0, 1.5), U, domain=(-4.0, 4.0))
        a, b = turning_points(h, float(eval_classical_hamiltonian(h, 0.0, 1.0)))
        assert abs(a + b) <= 1e-9


def test_allowed_intervals_and_solution():
    sol = solve_wkb(OSC, 1.5, make_grid(-3, 3, 128))
    assert len(sol.turning_points) == 2
    (a, b), = sol.allowed_intervals
    assert abs(a + 1) < 1e-9 and abs(b - 1) < 1e-9
    assert np.array_equal(sol.allowed, (sol.grid.x > a) & (sol.grid.x < b))
    assert allowed_intervals(FREE, 2.0) == [FREE.domain]


# --- actions ---------------------------------------------------------------------


def test_free_action():
    assert action_integral(FREE, math.sqrt(2), 0.0, 2.0) == pytest.approx(2.0, rel=1e-12)
    assert action_integral(FREE, math.sqrt(2), 2.0, 0.0) == pytest.approx(-2.0, rel=1e-12)
    assert action_integral(FREE, math.sqrt(2), 1.0, 1.0) == 0.0


def test_harmonic_action_against_simpson():
    xs = np.linspace(-1.0, 1.0, 1_000_001)
    with np.errstate(invalid="ignore"):
        ys = np.nan_to_num(osc_momentum(xs))
    oracle = simpson(ys, x=xs)
    assert abs(action_integral(OSC, 1.5, -1.0, 1.0) - oracle) < 1e-8
    # frozen reference from the same oracle
    assert abs(oracle - 1.71112564349073) < 1e-8


def test_action_across_forbidden_region():
    h = HamiltonianSpec(1.0, U=PolynomialInX((0, 0, -1.0, 0, 0.5)), domain=(-3.0, 3.0))
    E = float(eval_classical_hamiltonian(h, 0.0, 0.0)) - 0.1
    with pytest.raises(DomainError):
        action_integral(h, E, -1.5, 1.5)


def test_action_additivity():
    a, b, c = -1.0, 0.3, 1.0
    whole = action_integral(OSC, 1.5, a, c)
    parts = action_integral(OSC, 1.5, a, b) + action_integral(OSC, 1.5, b, c)
    assert abs(whole - parts) < 1e-9


@pytest.mark.parametrize("E, t, S, expected", [(1, 2, 3, 1), (0, 5, 0, 0), (math.sqrt(2), 1, 2, 2 - math.sqrt(2))])
def test_total_action(E, t, S, expected):
    assert total_action(E, t, S) == pytest.approx(expected, abs=1e-15)


# --- wavefunction ------------------------------------------------------------------


def test_plane_wave_phase():
    grid = make_grid(0.0, 2 * np.pi, 64)
    phase = wkb_phase(FREE, math.sqrt(2), grid)
    j = 32
    assert grid.x[j] == np.pi
    assert abs(phase[j] - np.pi) < 1e-12
    psi = wkb_wavefunction(FREE, math.sqrt(2), grid)
    assert np.max(np.abs(np.abs(psi) - 1)) < 1e-15


def test_zero_order_unit_modulus_in_well():
    psi = wkb_wavefunction(OSC, 1.5, make_grid(-0.9, 0.9, 128))
    assert np.max(np.abs(np.abs(psi) - 1)) < 1e-14


def test_first_order_amplitude_ratio():
    grid = make_grid(-0.8, 0.8, 64)
    psi = wkb_wavefunction(OSC, 1.5, grid, amplitude_mode="first_order")
    i0, i5 = 32, 52
    assert grid.x[i0] == 0.0
    ratio = abs(psi[i0]) / abs(psi[i5])
    oracle = math.sqrt(generalized_momentum(OSC, 1.5, grid.x[i5]) / generalized_momentum(OSC, 1.5, 0.0))
    assert abs(ratio - oracle) < 1e-10
    assert abs(math.sqrt(osc_momentum(0.5) / osc_momentum(0.0)) - oracle) < 1e-9
    assert abs(np.sum(np.abs(psi) ** 2) * grid.dx - 1) < 1e-12


def test_wavefunction_rejects_forbidden_grid():
    with pytest.raises(DomainError):
        wkb_wavefunction(OSC, 1.5, make_grid(-2, 2, 64))


def test_phase_derivative_is_second_order():
    def worst_error(n):
        grid = make_grid(-0.8, 0.8, n)
        phase = wkb_phase(OSC, 1.5, grid)
        deriv = (phase[2:] - phase[:-2]) / (2 * grid.dx)
        exact = osc_momentum(grid.x[1:-1]) / OSC.hbar
        # compare on the nodes shared by every refinement
        keep = np.isin(np.round(grid.x[1:-1], 12), np.round(np.linspace(-0.6, 0.6, 7), 12))
        return np.max(np.abs(deriv - exact)[keep])

    e1, e2, e3 = worst_error(64), worst_error(128), worst_error(256)
    assert math.log2(e1 / e2) >= 1.9
    assert math.log2(e2 / e3) >= 1.9


# --- validity diagnostics --------------------------------------------------------


def test_free_particle_wavelength_is_flat():
    diag = wkb_validity(FREE, 2.0, make_grid(-5, 5, 128))
    assert np.all(diag.dlambda_dx[1:-1] == 0)
    assert not diag.violation_mask.any()
    assert not diag.long_range_caution


def test_violation_next_to_turning_points():
    grid = make_grid(-2, 2, 256)
    diag = wkb_validity(OSC, 1.5, grid)
    for tp in (-1.0, 1.0):
        nearest = np.argsort(np.abs(grid.x - tp))[:2]
        assert diag.violation_mask[nearest].all()
    assert diag.violation_mask[~diag.allowed].all()


def test_small_hbar_mid_well_is_valid():
    h = OSC.with_hbar(0.01)
    grid = make_grid(-2, 2, 512)
    diag = wkb_validity(h, 1.5, grid)
    j = int(np.flatnonzero(grid.x == 0.0)[0])
    lam = lambda x: 2 * np.pi * 0.01 / osc_momentum(x)
    oracle = abs(lam(grid.dx) - lam(-grid.dx)) / (2 * grid.dx)
    assert abs(diag.dlambda_dx[j] - oracle) < 1e-12
    assert diag.dlambda_dx[j] < 0.1
    # U' = 0 at the centre, so the length test is switched off there too
    assert diag.char_length[j] == np.inf
    assert not diag.violation_mask[j]


def test_long_range_caution_for_slowly_varying_potential():
    h = HamiltonianSpec(1.0, U=PolynomialInX((1.0, 0.01)), domain=(-1.0, 1.0))
    diag = wkb_validity(h, 3.0, make_grid(-1, 1, 64))
    assert np.min(diag.char_length) > 2.0
    assert diag.long_range_caution


# --- Bohr-Sommerfeld -----------------------------------------------------------


def test_nonrelativistic_oscillator_levels():
    h = HamiltonianSpec(1.0, UnitSystem(1.0, 100.0), Harmonic(1.0), domain=(-6.0, 6.0))
    levels = bohr_sommerfeld_levels(h, 0, 5)
    assert [lv.n for lv in levels] == list(range(6))
    for lv in levels:
        assert abs(lv.energy - 1e4 - (lv.n + 0.5)) < 1e-3
        assert abs(lv.action_residual) <= 1e-10


def test_levels_strictly_increasing_and_relativistic_shift():
    levels = bohr_sommerfeld_levels(OSC.with_hbar(0.1), 0, 12)
    E = np.array([lv.energy for lv in levels])
    assert np.all(np.diff(E) > 0)
    # spacing shrinks as the orbit becomes relativistic
    assert np.all(np.diff(E, 2) < 0)


def _count_below(h, E_cut):
    n = 0
    while True:
        (lv,) = bohr_sommerfeld_levels(h, n, n)
        if lv.energy >= E_cut:
            return n
        n += 1


def test_halving_hbar_doubles_level_count():
    E_cut = 2.0
    n1 = _count_below(OSC.with_hbar(0.1), E_cut)
    n2 = _count_below(OSC.with_hbar(0.05), E_cut)
    assert n1 > 3
    assert abs(n2 - 2 * n1) <= 1


def test_empty_range():
    assert bohr_sommerfeld_levels(OSC, 3, 2) == []


@pytest.mark.parametrize("U", [Zero(), Linear(0.5)])
def test_no_well(U):
    with pytest.raises(StructureError):
        bohr_sommerfeld_levels(HamiltonianSpec(1.0, U=U), 0, 2)
