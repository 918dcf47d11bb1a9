"""Dense state-vector simulator.

Amplitudes are viewed as a ``(2,) * q`` tensor (optionally with one trailing
batch axis) so that a gate on qubit ``t`` with controls is a pair of basic
slices along axis ``t``, restricted to the control polarities. Everything is
updated in place on views; no ``2^q x 2^q`` matrix is ever formed except by
:func:`circuit_unitary`, which is only a test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import P, S, SDG, SWAP, UNITARY, X, Circuit, Gate, LayoutError
from .gateset import gate_matrix

MAX_UNITARY_QUBITS = 12


class DegenerateInputError(ValueError):
    pass


class ResourceError(MemoryError):
    pass


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise LayoutError("a state needs at least one qubit")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise LayoutError(
                f"expected {2**self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)


def init_basis(q: int, k: int) -> StateVector:
    if not 0 <= k < 2**q:
        raise IndexError(f"basis index {k} out of range for {q} qubits")
    amps = np.zeros(2**q, dtype=complex)
    amps[k] = 1.0
    return StateVector(q, amps)


def load_amplitudes(q: int, values) -> tuple[StateVector, float]:
    """Normalize ``values`` into a state; returns ``(state, norm)``."""
    values = np.asarray(values, dtype=complex).ravel()
    if values.shape != (2**q,):
        raise LayoutError(f"expected {2**q} values, got {values.size}")
    norm = float(np.linalg.norm(values))
    if norm == 0.0:
        raise DegenerateInputError("cannot normalize the zero vector")
    return StateVector(q, values / norm), norm


def _control_index(ndim: int, controls) -> list:
    idx = [slice(None)] * ndim
    for c, pol in controls:
        idx[c] = slice(pol, pol + 1)
    return idx


def _apply(psi: np.ndarray, gate: Gate) -> None:
    """Apply ``gate`` in place to the tensor ``psi`` (leading axes are qubits)."""
    idx = _control_index(psi.ndim, gate.controls)
    sub = psi[tuple(idx)]
    kind = gate.kind

    if kind == SWAP:
        a, b = gate.targets
        i01 = [slice(None)] * psi.ndim
        i10 = [slice(None)] * psi.ndim
        # Length-one slices keep views writable even on a bare one-qubit vector.
        i01[a], i01[b] = slice(0, 1), slice(1, 2)
        i10[a], i10[b] = slice(1, 2), slice(0, 1)
        v01, v10 = sub[tuple(i01)], sub[tuple(i10)]
        tmp = v01.copy()
        v01[...] = v10
        v10[...] = tmp
        return

    if kind == UNITARY:
        k = len(gate.targets)
        moved = np.moveaxis(sub, gate.targets, range(k))
        flat = moved.reshape(2**k, -1)
        moved[...] = (gate.matrix @ flat).reshape(moved.shape)
        return

    t = gate.targets[0]
    i0 = [slice(None)] * psi.ndim
    i1 = [slice(None)] * psi.ndim
    i0[t], i1[t] = slice(0, 1), slice(1, 2)
    a0, a1 = sub[tuple(i0)], sub[tuple(i1)]

    if kind == X:
        tmp = a0.copy()
        a0[...] = a1
        a1[...] = tmp
        return
    m = gate_matrix(kind, *gate.params)
    if kind in (P, S, SDG):
        a1 *= m[1, 1]
        return
    new0 = m[0, 0] * a0 + m[0, 1] * a1
    a1[...] = m[1, 0] * a0 + m[1, 1] * a1
    a0[...] = new0


def _check_width(gate: Gate, q: int) -> None:
    if any(qb >= q for qb in gate.qubits):
        raise LayoutError(f"{gate.kind} on {gate.qubits} exceeds register width {q}")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check_width(gate, state.num_qubits)
    out = state.copy()
    _apply(out.tensor(), gate)
    return out


def apply_circuit(state: StateVector, circuit: Circuit, inplace: bool = False) -> StateVector:
    if circuit.num_qubits != state.num_qubits:
        raise LayoutError(
            f"circuit width {circuit.num_qubits} != state width {state.num_qubits}"
        )
    out = state if inplace else state.copy()
    psi = out.tensor()
    for g in circuit.gates:
        _apply(psi, g)
    return out


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Full matrix of ``circuit``; column ``k`` is the image of ``|k>``."""
    q = circuit.num_qubits
    if q > MAX_UNITARY_QUBITS:
        raise ResourceError(f"refusing to build a dense unitary on {q} qubits")
    dim = 2**q
    # Trailing batch axis: column k of the identity is the basis state |k>.
    psi = np.eye(dim, dtype=complex).reshape((2,) * q + (dim,))
    for g in circuit.gates:
        _apply(psi, g)
    return psi.reshape(dim, dim)


def apply_circuit_batch(circuit: Circuit, columns: np.ndarray) -> np.ndarray:
    """Run ``circuit`` on every column of a ``(2^q, B)`` amplitude matrix."""
    q = circuit.num_qubits
    columns = np.array(columns, dtype=complex)
    if columns.ndim != 2 or columns.shape[0] != 2**q:
        raise LayoutError(f"expected a (2^{q}, B) array, got {columns.shape}")
    psi = columns.reshape((2,) * q + (columns.shape[1],))
    for g in circuit.gates:
        _apply(psi, g)
    return psi.reshape(columns.shape)
