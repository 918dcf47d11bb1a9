"""Gate applications and circuits.

Qubit 0 is the most significant bit of a basis-state index, so on an
``n``-qubit register ``|k> = |k_0 k_1 ... k_{n-1}>`` with
``k = sum_j k_j 2**(n-1-j)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class LayoutError(ValueError):
    """Raised for malformed qubit layouts (duplicates, out of range, width mismatch)."""


# Gate kinds. CNOT, Toffoli and MCX are an X gate carrying 1, 2 or m controls.
H = "H"
X = "X"
S = "S"
SDG = "SDG"
P = "P"
RY = "RY"
SWAP = "SWAP"
U3 = "U3"
B = "B"
BDG = "BDG"
UNITARY = "UNITARY"

SINGLE_QUBIT_KINDS = frozenset({H, X, S, SDG, P, RY, U3, B, BDG})
KINDS = SINGLE_QUBIT_KINDS | {SWAP, UNITARY}


@dataclass(frozen=True)
class Gate:
    """One gate application.

    ``controls`` holds ``(qubit, polarity)`` pairs; polarity 1 is a filled
    circle (act when the control is |1>), polarity 0 an empty circle.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = list(self.targets) + [c for c, _ in self.controls]
        if len(set(qubits)) != len(qubits):
            raise LayoutError(f"duplicate qubit in {self.kind} gate: {qubits}")
        if any(q < 0 for q in qubits):
            raise LayoutError(f"negative qubit index in {self.kind} gate")
        if any(pol not in (0, 1) for _, pol in self.controls):
            raise LayoutError("control polarity must be 0 or 1")
        if self.kind == SWAP and len(self.targets) != 2:
            raise LayoutError("SWAP needs exactly two targets")
        if self.kind in SINGLE_QUBIT_KINDS and len(self.targets) != 1:
            raise LayoutError(f"{self.kind} acts on exactly one target")
        if self.kind == UNITARY:
            if self.matrix is None or self.matrix.shape != (2 ** len(self.targets),) * 2:
                raise LayoutError("UNITARY gate needs a 2^k x 2^k matrix")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(c for c, _ in self.controls)

    @property
    def num_controls(self) -> int:
        return len(self.controls)

    def with_controls(self, extra: Iterable[tuple[int, int]]) -> "Gate":
        return Gate(self.kind, self.targets, tuple(extra) + self.controls, self.params, self.matrix)

    def remap(self, mapping: Sequence[int]) -> "Gate":
        return Gate(
            self.kind,
            tuple(mapping[t] for t in self.targets),
            tuple((mapping[c], pol) for c, pol in self.controls),
            self.params,
            self.matrix,
        )

    def inverse(self) -> "Gate":
        k = self.kind
        if k in (H, X, SWAP):
            return self
        if k == S:
            return Gate(SDG, self.targets, self.controls)
        if k == SDG:
            return Gate(S, self.targets, self.controls)
        if k == B:
            return Gate(BDG, self.targets, self.controls)
        if k == BDG:
            return Gate(B, self.targets, self.controls)
        if k in (P, RY):
            return Gate(k, self.targets, self.controls, (-self.params[0],))
        if k == U3:
            theta, phi, lam = self.params
            return Gate(U3, self.targets, self.controls, (-theta, -lam, -phi))
        return Gate(UNITARY, self.targets, self.controls, (), self.matrix.conj().T)


# Constructors -------------------------------------------------------------

def h(q: int) -> Gate:
    return Gate(H, (q,))


def x(q: int) -> Gate:
    return Gate(X, (q,))


def cnot(control: int, target: int, polarity: int = 1) -> Gate:
    return Gate(X, (target,), ((control, polarity),))


def toffoli(c0: int, c1: int, target: int) -> Gate:
    return Gate(X, (target,), ((c0, 1), (c1, 1)))


def mcx(controls: Sequence[int], target: int, polarities: Sequence[int] | None = None) -> Gate:
    if polarities is None:
        polarities = [1] * len(controls)
    return Gate(X, (target,), tuple(zip(controls, polarities)))


def phase(angle: float, q: int, controls: Sequence[tuple[int, int]] = ()) -> Gate:
    return Gate(P, (q,), tuple(controls), (float(angle),))


def phase_l(l: int, q: int, controls: Sequence[tuple[int, int]] = ()) -> Gate:
    """``P_l = diag(1, exp(2 pi i / 2**l))``, the QFT phase gate."""
    return phase(2.0 * math.pi / 2**l, q, controls)


def ry(theta: float, q: int, controls: Sequence[tuple[int, int]] = ()) -> Gate:
    return Gate(RY, (q,), tuple(controls), (float(theta),))


def u3(theta: float, phi: float, lam: float, q: int) -> Gate:
    return Gate(U3, (q,), (), (float(theta), float(phi), float(lam)))


def swap(a: int, b: int) -> Gate:
    return Gate(SWAP, (a, b))


def unitary(matrix: np.ndarray, targets: Sequence[int]) -> Gate:
    return Gate(UNITARY, tuple(targets), (), (), np.asarray(matrix, dtype=complex))


# Circuits -----------------------------------------------------------------

@dataclass
class Circuit:
    """Ordered gate list over a register of ``num_qubits`` qubits.

    ``registers`` names groups of qubits for readout; ``ancillas`` lists work
    qubits that every top-level gate leaves in |0>, which the transpiler may
    borrow as clean ancillas.
    """

    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    registers: dict[str, tuple[int, ...]] = field(default_factory=dict)
    ancillas: tuple[int, ...] = ()
    name: str = ""

    def append(self, gate: Gate) -> "Circuit":
        if any(q >= self.num_qubits for q in gate.qubits):
            raise LayoutError(
                f"{gate.kind} on qubits {gate.qubits} exceeds register width {self.num_qubits}"
            )
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def compose(self, other: "Circuit", qubits: Sequence[int] | None = None,
                controls: Sequence[tuple[int, int]] = ()) -> "Circuit":
        """Append ``other`` with its qubit ``i`` placed on ``qubits[i]``."""
        if qubits is None:
            qubits = range(other.num_qubits)
        qubits = list(qubits)
        if len(qubits) != other.num_qubits:
            raise LayoutError(f"compose: {len(qubits)} qubits given for width {other.num_qubits}")
        for g in other.gates:
            g = g.remap(qubits)
            if controls:
                g = g.with_controls(controls)
            self.append(g)
        return self

    def inverse(self) -> "Circuit":
        return Circuit(
            self.num_qubits,
            [g.inverse() for g in reversed(self.gates)],
            dict(self.registers),
            self.ancillas,
            f"{self.name}_dg" if self.name else "",
        )

    def copy(self) -> "Circuit":
        return Circuit(self.num_qubits, list(self.gates), dict(self.registers), self.ancillas, self.name)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)
