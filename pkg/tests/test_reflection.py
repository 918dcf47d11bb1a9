import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsine import classical as cl
from qsine.reflection import (
    build_forward_shift,
    build_qst,
    build_reflection_matrix,
    build_reflection_unitary,
    expected_reflection_unitary,
)
from qsine.statevector import StateVector, apply_circuit, circuit_unitary, init_basis

IMPLS = ["mcx", "ripple"]


def _clean_block(circ, n):
    """Unitary restricted to carries in |0> on both sides."""
    k = circ.num_qubits
    T = circuit_unitary(circ).reshape((2,) * 2 * k)
    sel = (slice(None),) * n + (0,) * (k - n)
    return T[sel + sel].reshape(2**n, 2**n)


def test_reflection_matrix_shape():
    R = build_reflection_matrix(8).matrix
    f = np.array([9, 1, 2, 3])
    assert list(R @ f) == [0, 1, 2, 3, 0, -3, -2, -1]
    with pytest.raises(ValueError):
        build_reflection_matrix(6)


@pytest.mark.parametrize("impl", IMPLS)
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_reflection_unitary(impl, n):
    circ = build_reflection_unitary(n, impl).circuit
    assert np.allclose(_clean_block(circ, n), expected_reflection_unitary(n), atol=1e-12)


@pytest.mark.parametrize("n", [3, 4])
def test_reflection_embeds_scaled_R(n):
    N, M = 2**n, 2 ** (n - 1)
    U = expected_reflection_unitary(n)
    R = build_reflection_matrix(N).matrix
    assert np.allclose(U[:, 1:M], 1j / np.sqrt(2) * R[:, 1:])


@pytest.mark.parametrize("impl", IMPLS)
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_qst_is_dst(impl, n):
    M = 2 ** (n - 1)
    block = _clean_block(build_qst(n, impl), n)[:M, :M]
    S = cl.dst_matrix(M)
    assert np.allclose(block[1:, 1:], 1j * S[1:, 1:], atol=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
@pytest.mark.parametrize("m", range(1, 6))
def test_controlled_shift(impl, m):
    circ = build_forward_shift(m, impl, controlled=True)
    q = circ.num_qubits
    for ctl in (0, 1):
        for k in range(2**m):
            start = (ctl << (q - 1)) | (k << (q - 1 - m))
            out = apply_circuit(init_basis(q, start), circ).amplitudes
            want = (ctl << (q - 1)) | (((k + ctl) % 2**m) << (q - 1 - m))
            assert out[want] == pytest.approx(1)


@given(st.sampled_from(IMPLS), st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_shift_on_superposition(impl, m, seed):
    circ = build_forward_shift(m, impl)
    q = circ.num_qubits
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**m) + 1j * rng.normal(size=2**m)
    psi = np.zeros(2**q, dtype=complex)
    psi[np.arange(2**m) << (q - m)] = v
    out = apply_circuit(StateVector(q, psi), circ).amplitudes
    assert np.allclose(out[np.arange(2**m) << (q - m)], np.roll(v, 1), atol=1e-13)


def test_shift_width():
    assert build_forward_shift(5, "mcx").num_qubits == 5
    assert build_forward_shift(5, "ripple").num_qubits == 9
    with pytest.raises(ValueError):
        build_forward_shift(3, "adder")
