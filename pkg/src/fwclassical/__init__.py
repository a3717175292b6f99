"""Classical limit of square-root Hamiltonians in the Foldy-Wouthuysen form.

Quasiclassical (WKB) analysis, exact quantum reference dynamics, classical
Hamilton dynamics and spin-amplitude evolution for

    H = sqrt(m^2 c^4 + c^2 p^2 + V(x, p)) + U(x)  (+ hbar Omega . s)
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .classical import (
    ConstantOmega,
    PhasePoint,
    TabulatedOmega,
    Trajectory,
    hamilton_rhs,
    integrate_trajectory,
    spin_precession_classical,
)
from .errors import (
    ConfigError,
    DomainError,
    FWClassicalError,
    IntegrationError,
    ModelError,
    NumericalBlowupError,
    SolverError,
    StateError,
    StructureError,
    UnsupportedModelError,
)
from .harness import (
    CorrespondenceReport,
    Packet,
    ScalingStudy,
    correspondence_run,
    hbar_scaling_study,
    wkb_level_table,
)
from .model import (
    Constant,
    Grid,
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
)
from .quantum import (
    SpectrumResult,
    WavefunctionState,
    expectation,
    gaussian_packet,
    kinetic_symbol,
    split_step_evolve,
    stationary_spectrum,
)
from .spin import (
    Polarization,
    SpinMatrices,
    SpinQuantum,
    SpinState,
    polarization,
    polarization_tensor,
    polarization_vector,
    spin_matrices,
)
from .spin_dynamics import evolve_spin_amplitude, polarization_trajectory, spin_hamiltonian
from .wkb import (
    WKBDiagnostics,
    WKBSolution,
    action_integral,
    bohr_sommerfeld_levels,
    generalized_momentum,
    solve_wkb,
    total_action,
    turning_points,
    wkb_validity,
    wkb_wavefunction,
)
