"""Hypothesis strategies shared across test modules."""
import math

from hypothesis import strategies as st

from qsine import circuit as C
from qsine.circuit import Circuit

GATE_KINDS = [C.H, C.X, C.S, C.SDG, C.P, C.RY, C.U3, C.B, C.BDG, C.SWAP]


@st.composite
def circuits(draw, min_qubits=2, max_qubits=5, max_gates=12):
    q = draw(st.integers(min_qubits, max_qubits))
    circ = Circuit(q)
    for _ in range(draw(st.integers(1, max_gates))):
        kind = draw(st.sampled_from(GATE_KINDS))
        width = 2 if kind == C.SWAP else 1
        qubits = draw(st.permutations(range(q)))
        targets = tuple(qubits[:width])
        nctl = draw(st.integers(0, min(3, q - width)))
        controls = tuple((c, draw(st.integers(0, 1))) for c in qubits[width:width + nctl])
        angle = draw(st.floats(-math.pi, math.pi, allow_nan=False))
        params = {C.P: (angle,), C.RY: (angle,), C.U3: (angle, angle / 2, -angle / 3)}.get(kind, ())
        circ.append(C.Gate(kind, targets, controls, params))
    return circ
