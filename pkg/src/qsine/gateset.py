"""Gate matrices, lowering to the {CNOT, U3} basis, and gate counting.

The lowering is a fixed deterministic rewrite with no peephole optimization:

* uncontrolled single-qubit gates become one ``U3`` (identities are dropped),
* singly-controlled ``U`` uses the ABC construction with a phase on the control,
* Toffoli uses the standard 6-CNOT network,
* MCX with ``m >= 3`` controls uses a clean-ancilla v-chain when at least
  ``m - 2`` clean ancillas are free, otherwise the ancilla-free recursion
  ``C^m U = C_m(V) C^{m-1}X C_m(V^dg) C^{m-1}X C^{m-1}(V)`` with ``V^2 = U``,
  whose inner ``C^{m-1}X`` borrows the target as a dirty ancilla,
* open (polarity 0) controls are conjugated by ``X``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import circuit as C
from .circuit import Circuit, Gate


class TranspileError(ValueError):
    pass


class CountError(ValueError):
    pass


_SQ2 = 1.0 / math.sqrt(2.0)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_S = np.diag([1, 1j])
_B = _H @ _S


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_matrix(kind: str, *params: float) -> np.ndarray:
    """Defining matrix of a gate kind, acting on its targets only.

    ``P`` takes the rotation angle; ``"P_l"`` takes the integer ``l`` of
    ``diag(1, exp(2 pi i / 2**l))``.
    """
    if kind == C.H:
        return _H.copy()
    if kind == C.X:
        return _X.copy()
    if kind == C.S:
        return _S.copy()
    if kind == C.SDG:
        return _S.conj().T
    if kind == C.B:
        return _B.copy()
    if kind == C.BDG:
        return _B.conj().T
    if kind == C.P:
        return np.diag([1.0, np.exp(1j * params[0])])
    if kind == "P_l":
        return np.diag([1.0, np.exp(2j * math.pi / 2 ** int(params[0]))])
    if kind == C.RY:
        return ry_matrix(params[0])
    if kind == C.U3:
        return u3_matrix(*params)
    if kind == C.SWAP:
        return np.eye(4, dtype=complex)[[0, 2, 1, 3]]
    if kind == "CNOT":
        return np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    raise ValueError(f"no fixed matrix for gate kind {kind!r}")


def zyz_angles(u: np.ndarray, atol: float = 1e-12) -> tuple[float, float, float, float]:
    """Return ``(alpha, theta, phi, lam)`` with ``u = exp(i alpha) U3(theta, phi, lam)``."""
    a, b, c, d = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    theta = 2.0 * math.atan2(abs(c), abs(a))
    if abs(c) < atol:
        alpha = float(np.angle(a))
        return alpha, 0.0, 0.0, float(np.angle(d)) - alpha
    if abs(a) < atol:
        alpha = float(np.angle(-b))
        return alpha, math.pi, float(np.angle(c)) - alpha, 0.0
    alpha = float(np.angle(a))
    return alpha, theta, float(np.angle(c)) - alpha, float(np.angle(-b)) - alpha


def _is_identity_up_to_phase(u: np.ndarray, atol: float = 1e-12) -> bool:
    return abs(u[0, 1]) < atol and abs(u[1, 0]) < atol and abs(u[0, 0] - u[1, 1]) < atol


def _sqrt_unitary(u: np.ndarray) -> np.ndarray:
    t, z = scipy.linalg.schur(u, output="complex")
    return z @ np.diag(np.sqrt(np.diag(t))) @ z.conj().T


def _rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


# Emission helpers. Intermediate single-qubit gates are UNITARY 2x2 gates;
# _finish() turns them into U3 at the end.

def _oneq(u: np.ndarray, q: int) -> Gate:
    return C.unitary(u, (q,))


def _cnot(c: int, t: int) -> Gate:
    return C.cnot(c, t)


def _toffoli(c0: int, c1: int, t: int) -> list[Gate]:
    T = np.diag([1, np.exp(0.25j * math.pi)])
    Td = T.conj().T
    return [
        _oneq(_H, t),
        _cnot(c1, t), _oneq(Td, t),
        _cnot(c0, t), _oneq(T, t),
        _cnot(c1, t), _oneq(Td, t),
        _cnot(c0, t), _oneq(T, c1), _oneq(T, t), _oneq(_H, t),
        _cnot(c0, c1), _oneq(T, c0), _oneq(Td, c1),
        _cnot(c0, c1),
    ]


def _controlled_u(c: int, t: int, u: np.ndarray) -> list[Gate]:
    """ABC construction of a singly-controlled single-qubit ``u``."""
    if np.allclose(u, _X, atol=1e-14):
        return [_cnot(c, t)]
    alpha0, theta, phi, lam = zyz_angles(u)
    alpha = alpha0 + 0.5 * (phi + lam)
    beta, gamma, delta = phi, theta, lam
    A = _rz(beta) @ ry_matrix(gamma / 2)
    B = ry_matrix(-gamma / 2) @ _rz(-(delta + beta) / 2)
    Cm = _rz((delta - beta) / 2)
    return [
        _oneq(Cm, t), _cnot(c, t), _oneq(B, t), _cnot(c, t), _oneq(A, t),
        _oneq(np.diag([1.0, np.exp(1j * alpha)]), c),
    ]


def _mcx_vchain(controls: Sequence[int], t: int, clean: Sequence[int]) -> list[Gate]:
    """``k`` controls, ``k - 2`` clean ancillas, ``2(k-2)+1`` Toffolis."""
    k = len(controls)
    a = list(clean[: k - 2])
    compute = _toffoli(controls[0], controls[1], a[0])
    for i in range(2, k - 1):
        compute += _toffoli(controls[i], a[i - 2], a[i - 1])
    middle = _toffoli(controls[-1], a[-1], t)
    uncompute = []
    for i in range(k - 2, 1, -1):
        uncompute += _toffoli(controls[i], a[i - 2], a[i - 1])
    uncompute += _toffoli(controls[0], controls[1], a[0])
    return compute + middle + uncompute


def _mcx_dirty_ladder(controls: Sequence[int], t: int, dirty: Sequence[int]) -> list[Gate]:
    """``k`` controls, ``k - 2`` dirty ancillas (left as found), ``4(k-2)`` Toffolis."""
    k = len(controls)
    if k <= 2:
        return _mcx_small(controls, t)
    a = list(dirty[: k - 2])
    body = _toffoli(controls[-1], a[-1], t)
    for i in range(k - 2, 1, -1):
        body += _toffoli(controls[i], a[i - 2], a[i - 1])
    body += _toffoli(controls[0], controls[1], a[0])
    for i in range(2, k - 1):
        body += _toffoli(controls[i], a[i - 2], a[i - 1])
    return body + body


def _mcx_small(controls: Sequence[int], t: int) -> list[Gate]:
    if len(controls) == 0:
        return [_oneq(_X, t)]
    if len(controls) == 1:
        return [_cnot(controls[0], t)]
    return _toffoli(controls[0], controls[1], t)


def _mcx_one_dirty(controls: Sequence[int], t: int, spare: int) -> list[Gate]:
    """MCX borrowing one dirty qubit ``spare``; linear in the control count."""
    k = len(controls)
    if k <= 2:
        return _mcx_small(controls, t)
    k1 = (k + 1) // 2
    c1, c2 = list(controls[:k1]), list(controls[k1:])
    first = _mcx_dirty_ladder(c1, spare, c2 + [t])
    second = _mcx_dirty_ladder(c2 + [spare], t, c1)
    return second + first + second + first


def _mcu_recursive(controls: Sequence[int], t: int, u: np.ndarray) -> list[Gate]:
    """Ancilla-free multi-controlled ``u``, quadratic in the control count."""
    k = len(controls)
    if k == 0:
        return [_oneq(u, t)]
    if k == 1:
        return _controlled_u(controls[0], t, u)
    if k == 2 and np.allclose(u, _X, atol=1e-14):
        return _toffoli(controls[0], controls[1], t)
    v = _sqrt_unitary(u)
    last, rest = controls[-1], list(controls[:-1])
    flip = _mcx_one_dirty(rest, last, t)
    return (
        _controlled_u(last, t, v)
        + flip
        + _controlled_u(last, t, v.conj().T)
        + flip
        + _mcu_recursive(rest, t, v)
    )


def _mcu(controls: Sequence[int], t: int, u: np.ndarray, clean: Sequence[int],
         dirty: Sequence[int] = ()) -> list[Gate]:
    """Multi-controlled single-qubit ``u`` with positive controls.

    ``clean`` qubits are known to be ``|0>``; ``dirty`` qubits are idle but in
    an unknown state and are handed back unchanged.
    """
    k = len(controls)
    is_x = np.allclose(u, _X, atol=1e-14)
    if k == 0:
        return [_oneq(u, t)]
    if k == 1:
        return _controlled_u(controls[0], t, u)
    if is_x:
        if k == 2:
            return _toffoli(controls[0], controls[1], t)
        if len(clean) >= k - 2:
            return _mcx_vchain(controls, t, clean)
        spare = list(clean) + list(dirty)
        if len(spare) >= k - 2:
            return _mcx_dirty_ladder(controls, t, spare)
        if spare:
            return _mcx_one_dirty(controls, t, spare[0])
        return _mcu_recursive(controls, t, u)
    if len(clean) >= k - 1:
        a = clean[0]
        into = _mcu(controls, a, _X, clean[1:], dirty)
        return into + _controlled_u(a, t, u) + into
    return _mcu_recursive(controls, t, u)


def _lower(gate: Gate, clean: Sequence[int], idle: Sequence[int] = ()) -> list[Gate]:
    kind = gate.kind
    if kind == C.U3 and not gate.controls:
        return [gate]
    if kind == C.X and len(gate.controls) == 1 and gate.controls[0][1] == 1:
        return [gate]

    negs = [c for c, pol in gate.controls if pol == 0]
    ctrls = [c for c, _ in gate.controls]
    free = [a for a in clean if a not in gate.qubits]
    dirty = [a for a in idle if a not in gate.qubits and a not in free]
    wrap = [_oneq(_X, c) for c in negs]

    if kind == C.SWAP:
        a, b = gate.targets
        body = [_cnot(b, a)] + _mcu(ctrls + [a], b, _X, free, dirty) + [_cnot(b, a)]
    elif kind == C.UNITARY:
        if len(gate.targets) != 1:
            raise TranspileError("only single-qubit dense blocks can be lowered")
        body = _mcu(ctrls, gate.targets[0], gate.matrix, free, dirty)
    elif kind in C.SINGLE_QUBIT_KINDS:
        body = _mcu(ctrls, gate.targets[0], gate_matrix(kind, *gate.params), free, dirty)
    else:
        raise TranspileError(f"cannot lower gate kind {kind!r}")
    return wrap + body + wrap


def _finish(gates: Iterable[Gate]) -> Iterable[Gate]:
    for g in gates:
        if g.kind == C.UNITARY:
            if _is_identity_up_to_phase(g.matrix):
                continue
            _, theta, phi, lam = zyz_angles(g.matrix)
            yield C.u3(theta, phi, lam, g.targets[0])
        else:
            yield g


def transpile(circuit: Circuit) -> Circuit:
    """Rewrite ``circuit`` over {CNOT, U3}; equal up to a global phase.

    Qubits listed in ``circuit.ancillas`` are treated as clean (|0> between
    top-level gates) and may be borrowed for v-chains. Any other qubit a gate
    does not touch may be borrowed dirty for multi-controlled X.
    """
    out = Circuit(circuit.num_qubits, [], dict(circuit.registers), circuit.ancillas, circuit.name)
    every = range(circuit.num_qubits)
    for g in circuit.gates:
        out.gates.extend(_finish(_lower(g, circuit.ancillas, every)))
    return out


def decompose_mcx(m: int, ancilla_budget: int = 0) -> Circuit:
    """Lowered MCX on controls ``0..m-1``, target ``m``, ancillas after that."""
    if m < 1:
        raise ValueError("MCX needs at least one control")
    anc = tuple(range(m + 1, m + 1 + ancilla_budget))
    circ = Circuit(m + 1 + ancilla_budget, name=f"mcx{m}", ancillas=anc)
    circ.registers = {"controls": tuple(range(m)), "target": (m,), "ancilla": anc}
    circ.append(C.mcx(range(m), m))
    return transpile(circ)


@dataclass(frozen=True)
class GateCount:
    cnot_count: int
    u3_count: int
    total: int
    num_ancilla: int = 0


def count_gates(circuit: Circuit) -> GateCount:
    cx = u = 0
    for g in circuit.gates:
        if g.kind == C.X and len(g.controls) == 1 and g.controls[0][1] == 1:
            cx += 1
        elif g.kind == C.U3 and not g.controls:
            u += 1
        else:
            raise CountError(f"gate {g.kind} with {len(g.controls)} controls is not in {{CNOT, U3}}")
    return GateCount(cx, u, cx + u, _work_qubit_count(circuit))


_PAYLOAD_REGISTERS = ("data", "reflection", "control", "controls", "target")


def _work_qubit_count(circuit: Circuit) -> int:
    """Qubits outside the payload registers (carries, flags, rotation, ancillas)."""
    if not circuit.registers:
        return len(circuit.ancillas)
    payload = set()
    for name in _PAYLOAD_REGISTERS:
        payload.update(circuit.registers.get(name, ()))
    return circuit.num_qubits - len(payload)


GATE_COUNT_COLUMNS = ("circuit_name", "n_qubits", "n_ancilla", "cnot", "u3", "total")


def gate_count_row(circuit: Circuit, count: GateCount | None = None) -> dict:
    if count is None:
        count = count_gates(circuit)
    return {
        "circuit_name": circuit.name,
        "n_qubits": circuit.num_qubits,
        "n_ancilla": count.num_ancilla,
        "cnot": count.cnot_count,
        "u3": count.u3_count,
        "total": count.total,
    }


def write_gate_counts(path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=GATE_COUNT_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(r)
