import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsine.qft import build_qft, build_qft_inverse, dft_matrix
from qsine.statevector import StateVector, apply_circuit, circuit_unitary


@pytest.mark.parametrize("n", range(1, 7))
def test_qft_is_dft(n):
    assert np.max(np.abs(circuit_unitary(build_qft(n).circuit) - dft_matrix(2**n))) <= 1e-12


def test_without_swaps_is_bit_reversed():
    n = 4
    U = circuit_unitary(build_qft(n, include_swaps=False).circuit)
    rev = [int(format(k, "04b")[::-1], 2) for k in range(16)]
    assert np.allclose(U[rev], dft_matrix(16))


def test_inverse_and_numpy_convention():
    F = dft_matrix(8)
    assert np.allclose(circuit_unitary(build_qft_inverse(3).circuit), F.conj().T)
    x = np.arange(8.0)
    # w = exp(+2 pi i / N): numpy's unitary inverse FFT
    assert np.allclose(F @ x, np.fft.ifft(x, norm="ortho"))


def test_rejects_bad_sizes():
    with pytest.raises(ValueError):
        dft_matrix(6)
    with pytest.raises(ValueError):
        build_qft(0)


@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_qft_matches_fft_on_states(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    v /= np.linalg.norm(v)
    out = apply_circuit(StateVector(n, v), build_qft(n).circuit).amplitudes
    assert np.allclose(out, np.fft.ifft(v, norm="ortho"), atol=1e-12)
