"""Quantum Fourier transform circuits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuit as C
from .circuit import Circuit


@dataclass(frozen=True)
class QftCircuit:
    n: int
    include_swaps: bool
    circuit: Circuit


def dft_matrix(N: int) -> np.ndarray:
    """Unitary DFT ``(1/sqrt N) w^{jk}`` with ``w = exp(2 pi i / N)``."""
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    jk = np.outer(np.arange(N), np.arange(N)) % N
    return np.exp(2j * np.pi * jk / N) / np.sqrt(N)


def _qft_gates(n: int, include_swaps: bool) -> list:
    gates = []
    for j in range(n):
        gates.append(C.h(j))
        for l in range(2, n - j + 1):
            gates.append(C.phase_l(l, j, [(j + l - 1, 1)]))
    if include_swaps:
        for j in range(n // 2):
            gates.append(C.swap(j, n - 1 - j))
    return gates


def build_qft(n: int, include_swaps: bool = True) -> QftCircuit:
    if n < 1:
        raise ValueError("QFT needs at least one qubit")
    circ = Circuit(n, _qft_gates(n, include_swaps), {"data": tuple(range(n))}, name=f"qft{n}")
    return QftCircuit(n, include_swaps, circ)


def build_qft_inverse(n: int, include_swaps: bool = True) -> QftCircuit:
    circ = build_qft(n, include_swaps).circuit.inverse()
    circ.name = f"iqft{n}"
    return QftCircuit(n, include_swaps, circ)
