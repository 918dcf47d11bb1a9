import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsine import circuit as C
from qsine.circuit import Circuit, Gate, LayoutError
from qsine.statevector import (
    MAX_UNITARY_QUBITS,
    DegenerateInputError,
    ResourceError,
    StateVector,
    apply_circuit,
    apply_circuit_batch,
    apply_gate,
    circuit_unitary,
    init_basis,
    load_amplitudes,
)

from strategies import circuits


def test_msb_first_ordering():
    # X on qubit 0 flips the most significant bit.
    out = apply_gate(init_basis(3, 0), C.x(0))
    assert out.amplitudes[4] == 1


def test_polarity_zero_control():
    g = Gate(C.X, (1,), ((0, 0),))
    assert apply_gate(init_basis(2, 0), g).amplitudes[1] == 1
    assert apply_gate(init_basis(2, 2), g).amplitudes[2] == 1


def test_swap_and_hadamard():
    s = apply_gate(init_basis(2, 1), C.swap(0, 1))
    assert s.amplitudes[2] == 1
    h = apply_gate(init_basis(1, 0), C.h(0)).amplitudes
    assert np.allclose(h, [2**-0.5, 2**-0.5])


def test_load_amplitudes_returns_norm():
    state, norm = load_amplitudes(2, [3, 0, 4, 0])
    assert norm == pytest.approx(5.0)
    assert state.norm() == pytest.approx(1.0)


def test_load_zero_vector_rejected():
    with pytest.raises(DegenerateInputError):
        load_amplitudes(2, np.zeros(4))


def test_layout_errors():
    with pytest.raises(LayoutError):
        StateVector(2, np.zeros(3))
    with pytest.raises(LayoutError):
        apply_gate(init_basis(2, 0), C.x(2))
    with pytest.raises(LayoutError):
        Gate(C.X, (0,), ((0, 1),))
    with pytest.raises(IndexError):
        init_basis(2, 4)


def test_unitary_size_guard():
    with pytest.raises(ResourceError):
        circuit_unitary(Circuit(MAX_UNITARY_QUBITS + 1))


@given(circuits())
def test_inverse_undoes_circuit(circ):
    U = circuit_unitary(circ)
    V = circuit_unitary(circ.inverse())
    assert np.allclose(V @ U, np.eye(U.shape[0]), atol=1e-12)


@given(circuits(), st.integers(0, 2**31 - 1))
def test_batch_matches_single(circ, seed):
    rng = np.random.default_rng(seed)
    cols = rng.normal(size=(2**circ.num_qubits, 3)) + 0j
    out = apply_circuit_batch(circ, cols)
    for b in range(3):
        one = apply_circuit(StateVector(circ.num_qubits, cols[:, b]), circ).amplitudes
        assert np.allclose(out[:, b], one, atol=1e-13)


@given(circuits(max_qubits=4))
def test_unitary_columns_are_basis_images(circ):
    U = circuit_unitary(circ)
    k = 2**circ.num_qubits - 1
    assert np.allclose(U[:, k], apply_circuit(init_basis(circ.num_qubits, k), circ).amplitudes)
