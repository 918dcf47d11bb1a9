"""Quantum sine-transform spectral solver for Dirichlet problems, on a state-vector simulator."""

from .circuit import Circuit, Gate, LayoutError
from .classical import (
    FRACTIONAL,
    POISSON,
    ProblemSpec,
    covariance_matrix,
    covariance_row,
    extend_antisymmetric,
    lift_inhomogeneous,
    matern_covariance,
    sample_white_noise,
    solve_classical,
    spde_params,
)
from .gateset import GateCount, count_gates, decompose_mcx, transpile
from .polyenc import (
    build_comparator,
    build_up_bivariate,
    build_up_univariate,
    fit_univariate,
    multinomial_angles,
)
from .qft import build_qft, dft_matrix
from .reflection import (
    ShiftImpl,
    build_forward_shift,
    build_qst,
    build_reflection_matrix,
    build_reflection_unitary,
)
from .solver import (
    QuantumSolveResult,
    build_solver_circuit_1d,
    build_solver_circuit_2d,
    quantum_solve,
    sample_random_field_quantum,
)
from .statevector import StateVector, apply_circuit, circuit_unitary, init_basis

__version__ = "0.1.0"
