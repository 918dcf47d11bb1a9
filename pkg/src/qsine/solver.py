"""End-to-end quantum solves on the state-vector simulator.

1D register: ``rotation, reflection, data(n-1), flags, carries``.
2D register: ``rotation, reflection1, reflection0, k1 data, k0 data, flags0,
flags1, carries``. Carries are shared by the shift and comparator blocks,
which never run at the same time and always hand them back in ``|0>``.

The circuit is sine transform, diagonal encoding, inverse sine transform.
On the success branch (rotation ``|1>``, every other ancilla ``|0>``) the
data register holds ``S diag(sin theta) S f / |f|``, so the solution is the
branch amplitude times ``|f| / s``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import polyenc
from .circuit import Circuit
from .classical import FRACTIONAL, ProblemSpec, sample_white_noise
from .polyenc import SpectralDiagonal
from .reflection import ShiftImpl, build_qst, _shift_width
from .statevector import StateVector, apply_circuit, apply_circuit_batch, load_amplitudes


class ConfigurationError(ValueError):
    pass


class DegeneratePostselectionError(RuntimeError):
    pass


MIN_BRANCH_NORM = 1e-14


@dataclass
class QuantumSolveResult:
    u: np.ndarray
    scale_chain: list
    success_probability: float
    diag: SpectralDiagonal | None = None
    circuit: Circuit | None = field(default=None, repr=False)
    raw_state: StateVector | None = field(default=None, repr=False)


def _log2(M: int) -> int:
    n = M.bit_length() - 1
    if M < 2 or 2**n != M:
        raise ConfigurationError(f"grid size must be a power of two >= 2, got {M}")
    return n


def build_diagonal(spec: ProblemSpec, p: int, partition=None, k_split: int = 8,
                   fit_all_cells: bool | None = None) -> SpectralDiagonal:
    """Fitted diagonal for ``spec``.

    2D Poisson fits only the low-wavenumber cell ``[1, k_split)^2`` and leaves
    the rest at zero; 2D fractional fits every cell unless told otherwise.
    """
    n = _log2(spec.M)
    exact = spec.inverse_diagonal()
    if spec.dim == 1:
        return polyenc.make_diagonal_1d(exact, n, p, partition)
    if fit_all_cells is None:
        fit_all_cells = spec.family == FRACTIONAL
    cells = None if fit_all_cells else {(0, 0)}
    return polyenc.make_diagonal_2d(exact, n, p, k_split, cells)


def _carry_count(diag: SpectralDiagonal, shift_impl: ShiftImpl) -> int:
    n = diag.n
    shift = _shift_width(n, shift_impl) - n
    if diag.dim == 1:
        bps = diag.fit.breakpoints
    else:
        bps = list(diag.fit.breaks0) + list(diag.fit.breaks1)
    cmp = max((polyenc.comparator_carries(n, t) for t in bps), default=0)
    return max(shift, cmp)


def build_solver_circuit_1d(spec: ProblemSpec | None, diag: SpectralDiagonal,
                            shift_impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    if diag is None or diag.fit is None:
        raise ConfigurationError("solver needs a fitted diagonal")
    impl = ShiftImpl(shift_impl)
    nd = diag.n
    if spec is not None and spec.M != 2**nd:
        raise ConfigurationError(f"diagonal is for {2**nd} points, problem has {spec.M}")
    nf = len(diag.fit.breakpoints)
    nc = _carry_count(diag, impl)
    rot, refl = 0, 1
    data = tuple(range(2, 2 + nd))
    flags = tuple(range(2 + nd, 2 + nd + nf))
    carry = tuple(range(2 + nd + nf, 2 + nd + nf + nc))
    circ = Circuit(2 + nd + nf + nc, name=f"solver1d_{impl.value}{nd + 1}")
    circ.registers = {"rotation": (rot,), "reflection": (refl,), "data": data,
                      "flags": flags, "carry": carry}

    qst = build_qst(nd + 1, impl)
    qst_map = (refl,) + data + carry[: qst.num_qubits - nd - 1]
    circ.compose(qst, qst_map)
    circ.extend(polyenc.up_univariate_gates(diag.fit, data, rot, flags, carry))
    circ.compose(qst.inverse(), qst_map)
    return circ


def build_solver_circuit_2d(spec: ProblemSpec | None, diag: SpectralDiagonal,
                            shift_impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    if diag is None or diag.fit is None or diag.dim != 2:
        raise ConfigurationError("solver needs a fitted bivariate diagonal")
    impl = ShiftImpl(shift_impl)
    nd = diag.n
    if spec is not None and spec.M != 2**nd:
        raise ConfigurationError(f"diagonal is for {2**nd} points, problem has {spec.M}")
    fit = diag.fit
    nf0, nf1 = len(fit.breaks0), len(fit.breaks1)
    nc = _carry_count(diag, impl)
    rot, refl1, refl0 = 0, 1, 2
    k1 = tuple(range(3, 3 + nd))
    k0 = tuple(range(3 + nd, 3 + 2 * nd))
    base = 3 + 2 * nd
    f0 = tuple(range(base, base + nf0))
    f1 = tuple(range(base + nf0, base + nf0 + nf1))
    carry = tuple(range(base + nf0 + nf1, base + nf0 + nf1 + nc))
    circ = Circuit(base + nf0 + nf1 + nc, name=f"solver2d_{impl.value}{nd + 1}")
    circ.registers = {"rotation": (rot,), "reflection": (refl1, refl0), "data": k1 + k0,
                      "flags": f0 + f1, "carry": carry}

    qst = build_qst(nd + 1, impl)
    extra = qst.num_qubits - nd - 1
    maps = [(refl1,) + k1 + carry[:extra], (refl0,) + k0 + carry[:extra]]
    for m in maps:
        circ.compose(qst, m)
    circ.extend(polyenc.up_bivariate_gates(fit, k0, k1, rot, f0, f1, carry))
    for m in maps:
        circ.compose(qst.inverse(), m)
    return circ


def build_solver_circuit(spec: ProblemSpec, diag: SpectralDiagonal,
                         shift_impl: ShiftImpl | str = ShiftImpl.MCX) -> Circuit:
    if diag.dim == 1:
        return build_solver_circuit_1d(spec, diag, shift_impl)
    return build_solver_circuit_2d(spec, diag, shift_impl)


def _input_columns(circ: Circuit, forcing: np.ndarray) -> np.ndarray:
    """Place data-register amplitudes with every ancilla in ``|0>``."""
    q = circ.num_qubits
    data = circ.registers["data"]
    first = data[0]
    nd = len(data)
    if list(data) != list(range(first, first + nd)):
        raise ConfigurationError("data register must be contiguous")
    B = forcing.shape[-1]
    psi = np.zeros((2**first, 2**nd, 2 ** (q - first - nd), B), dtype=complex)
    psi[0, :, 0, :] = forcing
    return psi.reshape(2**q, B)


def _success_index(circ: Circuit) -> tuple:
    idx = [0] * circ.num_qubits
    for qb in circ.registers["data"]:
        idx[qb] = slice(None)
    idx[circ.registers["rotation"][0]] = 1
    return tuple(idx)


def _clean_index(circ: Circuit) -> tuple:
    idx = list(_success_index(circ))
    idx[circ.registers["rotation"][0]] = slice(None)
    return tuple(idx)


def success_branch(circ: Circuit, amplitudes: np.ndarray) -> np.ndarray:
    """Data amplitudes of the success branch, MSB-first flattened."""
    q = circ.num_qubits
    psi = amplitudes.reshape((2,) * q + amplitudes.shape[1:])
    nd = len(circ.registers["data"])
    return psi[_success_index(circ)].reshape((2**nd,) + amplitudes.shape[1:])


def stray_mass(circ: Circuit, amplitudes: np.ndarray) -> float:
    """Probability outside the subspace where every non-rotation ancilla is ``|0>``."""
    q = circ.num_qubits
    psi = amplitudes.reshape((2,) * q + amplitudes.shape[1:])
    total = float(np.sum(np.abs(amplitudes) ** 2))
    clean = float(np.sum(np.abs(psi[_clean_index(circ)]) ** 2))
    return total - clean


def _to_register(spec: ProblemSpec, f: np.ndarray) -> np.ndarray:
    # 2D data register is k1-major: flat index i1*M + i0.
    return f.ravel() if spec.dim == 1 else f.T.ravel()


def _from_register(spec: ProblemSpec, v: np.ndarray) -> np.ndarray:
    if spec.dim == 1:
        return v
    M = spec.M
    return v.reshape((M, M) + v.shape[1:]).swapaxes(0, 1)


def _prepare(spec: ProblemSpec, p, partition, k_split, shift_impl, diag, circuit):
    if diag is None:
        diag = build_diagonal(spec, p, partition, k_split)
    if circuit is None:
        circuit = build_solver_circuit(spec, diag, shift_impl)
    return diag, circuit


def quantum_solve(spec: ProblemSpec, p: int = 4, partition=None, k_split: int = 8,
                  shift_impl: ShiftImpl | str = ShiftImpl.MCX,
                  diag: SpectralDiagonal | None = None, circuit: Circuit | None = None,
                  keep_state: bool = False) -> QuantumSolveResult:
    """Simulate the solver circuit and rescale the success branch."""
    diag, circuit = _prepare(spec, p, partition, k_split, shift_impl, diag, circuit)
    f = spec.forcing.copy()
    for ax in range(spec.dim):
        idx = [slice(None)] * spec.dim
        idx[ax] = 0
        f[tuple(idx)] = 0.0
    flat = _to_register(spec, f)
    nd = len(circuit.registers["data"])
    state, norm = load_amplitudes(nd, flat) if np.any(flat) else (None, 0.0)
    if state is None:
        return QuantumSolveResult(np.zeros_like(f), [("input_norm", 0.0), ("inverse_diagonal_scale", 1 / diag.scale)],
                                  0.0, diag, circuit)
    cols = _input_columns(circuit, state.amplitudes[:, None])
    full = StateVector(circuit.num_qubits, cols[:, 0])
    full = apply_circuit(full, circuit, inplace=True)
    branch = success_branch(circuit, full.amplitudes[:, None])[:, 0]
    prob = float(np.sum(np.abs(branch) ** 2))
    if math.sqrt(prob) < MIN_BRANCH_NORM:
        raise DegeneratePostselectionError("success branch has vanishing norm")
    chain = [("input_norm", norm), ("inverse_diagonal_scale", 1.0 / diag.scale)]
    factor = norm / diag.scale
    u = _from_register(spec, np.real(branch) * factor)
    return QuantumSolveResult(u, chain, prob, diag, circuit, full if keep_state else None)


def quantum_solve_batch(spec: ProblemSpec, forcings: np.ndarray, p: int = 4, partition=None,
                        k_split: int = 8, shift_impl: ShiftImpl | str = ShiftImpl.MCX,
                        diag: SpectralDiagonal | None = None, circuit: Circuit | None = None,
                        chunk: int = 256) -> np.ndarray:
    """Solve many forcings (stacked on the last axis) in one batched simulation."""
    diag, circuit = _prepare(spec, p, partition, k_split, shift_impl, diag, circuit)
    forcings = np.asarray(forcings, dtype=float)
    B = forcings.shape[-1]
    flat = np.stack([_to_register(spec, forcings[..., b]) for b in range(B)], axis=1)
    norms = np.linalg.norm(flat, axis=0)
    if np.any(norms == 0):
        raise ConfigurationError("zero forcing in batch")
    out = np.empty_like(flat)
    for s in range(0, B, chunk):
        sl = slice(s, min(s + chunk, B))
        cols = _input_columns(circuit, flat[:, sl] / norms[sl])
        res = apply_circuit_batch(circuit, cols)
        out[:, sl] = np.real(success_branch(circuit, res)) * (norms[sl] / diag.scale)
    return _from_register(spec, out)


def sample_random_field_quantum(spec: ProblemSpec, n_samples: int, seed, p: int = 4,
                                partition=None, k_split: int = 8,
                                shift_impl: ShiftImpl | str = ShiftImpl.MCX,
                                diag: SpectralDiagonal | None = None) -> list[np.ndarray]:
    """Random-field samples: white-noise forcings pushed through the quantum solve."""
    if spec.family != FRACTIONAL:
        raise ConfigurationError("random fields need the fractional family")
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=n_samples)
    noise = np.stack([sample_white_noise(spec.M, spec.tau, int(s), spec.dim) for s in seeds], axis=-1)
    u = quantum_solve_batch(spec, noise, p, partition, k_split, shift_impl, diag)
    return [u[..., i] for i in range(n_samples)]


def quantum_covariance_row(spec: ProblemSpec, index, p: int = 4, partition=None,
                           k_split: int = 8, shift_impl: ShiftImpl | str = ShiftImpl.MCX,
                           diag: SpectralDiagonal | None = None,
                           noise_variance: float | None = None) -> np.ndarray:
    """Covariance row against grid point ``index`` from two chained quantum solves.

    The covariance is ``sigma^2 A A^T`` with ``A = S d S`` symmetric, so
    applying the solve twice to a point source gives the row.
    """
    if spec.family != FRACTIONAL:
        raise ConfigurationError("covariance rows need the fractional family")
    if noise_variance is None:
        noise_variance = spec.h ** (-spec.dim)
    diag, circuit = _prepare(spec, p, partition, k_split, shift_impl, diag, None)
    e = np.zeros((spec.M,) * spec.dim)
    e[index] = 1.0
    once = quantum_solve_batch(spec, e[..., None], diag=diag, circuit=circuit)
    twice = quantum_solve_batch(spec, once, diag=diag, circuit=circuit)
    return noise_variance * twice[..., 0]
