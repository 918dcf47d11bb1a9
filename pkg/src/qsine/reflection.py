"""Antisymmetric extension as a unitary, forward shifts, and the sine transform.

Register layout for an ``n``-qubit extended grid: qubit 0 is the reflection
ancilla (the most significant bit of the extended index), qubits ``1..n-1``
hold the physical index ``k``. Ripple-carry shifts append ``n - 2`` carry
qubits after the data.

On that layout the reflection unitary maps

* ``|0>|k> -> (i/sqrt2)(|k> - |N-k>)`` for ``1 <= k < N/2``,
* ``|0>|0> -> |N/2>``,
* ``|1>|k> -> (|k> + |N-k>)/sqrt2`` for ``k >= 1``, and ``|1>|0> -> |0>``,

so the ``|0>`` half is ``-i R / sqrt2`` up to the first column.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import circuit as C
from .circuit import Circuit, LayoutError
from .qft import build_qft


class ShiftImpl(str, Enum):
    MCX = "mcx"
    RIPPLE = "ripple"


@dataclass(frozen=True)
class ClassicalReflection:
    N: int
    matrix: np.ndarray

    def __matmul__(self, f):
        return self.matrix @ f


@dataclass(frozen=True)
class ReflectionCircuit:
    n: int
    shift_impl: ShiftImpl
    circuit: Circuit
    ancilla_count: int


def _check_pow2(N: int, minimum: int = 4) -> None:
    if N < minimum or N & (N - 1):
        raise ValueError(f"N must be a power of two >= {minimum}, got {N}")


def build_reflection_matrix(N: int) -> ClassicalReflection:
    """``N x N/2`` matrix taking ``f`` to ``(0, f_1.., 0, -f_{N/2-1}.., -f_1)``."""
    _check_pow2(N)
    M = N // 2
    R = np.zeros((N, M), dtype=int)
    for k in range(1, M):
        R[k, k] = 1
        R[N - k, k] = -1
    return ClassicalReflection(N, R)


def expected_reflection_unitary(n: int) -> np.ndarray:
    """The reflection unitary written out entry by entry."""
    N = 2**n
    M = N // 2
    U = np.zeros((N, N), dtype=complex)
    s = 1 / np.sqrt(2)
    U[M, 0] = 1.0
    U[0, M] = 1.0
    for k in range(1, M):
        U[k, k] = 1j * s
        U[N - k, k] = -1j * s
        U[k, M + k] = s
        U[N - k, M + k] = s
    return U


def _shift_width(m: int, impl: ShiftImpl) -> int:
    return m + (max(m - 1, 0) if ShiftImpl(impl) is ShiftImpl.RIPPLE else 0)


def _shift_gates(data: Sequence[int], impl: ShiftImpl, carries: Sequence[int],
                 control: int | None) -> list:
    """``|k> -> |k+1 mod 2^m>`` on ``data`` (MSB first), optionally controlled."""
    m = len(data)
    ctl = [] if control is None else [(control, 1)]
    if ShiftImpl(impl) is ShiftImpl.MCX:
        gates = []
        for j in range(m - 1):
            lower = [(d, 1) for d in data[j + 1:]]
            gates.append(C.Gate(C.X, (data[j],), tuple(ctl + lower)))
        gates.append(C.Gate(C.X, (data[-1],), tuple(ctl)))
        return gates

    # Ripple carry: bit i counted from the LSB, carry a[i] = AND of bits below i
    # (and the control, which acts as the carry-in).
    bits = list(reversed(data))
    a = [None] + list(carries[: m - 1])

    def carry_gate(i):
        if i == 1:
            if control is None:
                return C.cnot(bits[0], a[1])
            return C.toffoli(control, bits[0], a[1])
        return C.toffoli(a[i - 1], bits[i - 1], a[i])

    gates = [carry_gate(i) for i in range(1, m)]
    for i in range(m - 1, 0, -1):
        gates.append(C.cnot(a[i], bits[i]))
        gates.append(carry_gate(i))
    gates.append(C.x(bits[0]) if control is None else C.cnot(control, bits[0]))
    return gates


def build_forward_shift(m: int, impl: ShiftImpl | str = ShiftImpl.MCX,
                        controlled: bool = False) -> Circuit:
    """Cyclic increment on ``m`` data qubits.

    Layout: ``[control?] data(m) carries(m-1, ripple only)``.
    """
    impl = ShiftImpl(impl)
    if m < 1:
        raise ValueError("shift needs at least one data qubit")
    off = 1 if controlled else 0
    data = list(range(off, off + m))
    width = off + _shift_width(m, impl)
    carries = list(range(off + m, width))
    circ = Circuit(width, name=f"uf_{impl.value}{m}")
    circ.registers = {"data": tuple(data), "carry": tuple(carries)}
    if controlled:
        circ.registers["control"] = (0,)
    circ.extend(_shift_gates(data, impl, carries, 0 if controlled else None))
    return circ


def _base(n: int, impl: ShiftImpl, name: str) -> Circuit:
    if n < 2:
        raise ValueError("reflection needs n >= 2")
    width = 1 + _shift_width(n - 1, impl)
    circ = Circuit(width, name=name)
    circ.registers = {
        "reflection": (0,),
        "data": tuple(range(1, n)),
        "carry": tuple(range(n, width)),
    }
    return circ


def build_u_r0(n: int, impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    circ = _base(n, ShiftImpl(impl), "ur0")
    return circ.extend([C.x(0), C.Gate(C.B, (0,))])


def build_u_r1(n: int, impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    circ = _base(n, ShiftImpl(impl), "ur1")
    return circ.append(C.Gate(C.BDG, (0,), tuple((q, 0) for q in range(1, n))))


def build_u_r2(n: int, impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    circ = _base(n, ShiftImpl(impl), "ur2")
    return circ.extend(C.cnot(0, q) for q in range(1, n))


def build_u_r3(n: int, impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    impl = ShiftImpl(impl)
    circ = _base(n, impl, "ur3")
    return circ.extend(
        _shift_gates(list(range(1, n)), impl, circ.registers["carry"], control=0)
    )


def build_reflection_unitary(n: int, shift_impl: ShiftImpl | str = ShiftImpl.MCX) -> ReflectionCircuit:
    impl = ShiftImpl(shift_impl)
    circ = _base(n, impl, f"ur_{impl.value}{n}")
    for part in (build_u_r0, build_u_r1, build_u_r2, build_u_r3):
        circ.extend(part(n, impl).gates)
    return ReflectionCircuit(n, impl, circ, circ.num_qubits - n)


def build_qst(n: int, shift_impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    """Sine transform: reflection unitary, then QFT, then reflection inverse.

    On the reflection-ancilla-|0> subspace this acts as ``(1/2) R^T F_N R``,
    which is ``i`` times the orthonormal DST-I.
    """
    ur = build_reflection_unitary(n, shift_impl).circuit
    circ = Circuit(ur.num_qubits, [], dict(ur.registers), ur.ancillas, f"qst_{ShiftImpl(shift_impl).value}{n}")
    circ.extend(ur.gates)
    circ.compose(build_qft(n).circuit, range(n))
    circ.extend(ur.inverse().gates)
    return circ
