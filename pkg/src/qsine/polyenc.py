"""Piecewise polynomial fits of spectral diagonals and their rotation encoding.

A diagonal value ``v(k)`` in ``[0, 1]`` is stored as the ``|1>`` amplitude of
a rotation qubit, ``sin(theta(k))`` with ``theta = arcsin(v)`` fitted by a
polynomial in ``k``. Writing ``k`` in binary turns the polynomial into a sum
of products of bits (``b^2 = b``), so ``R_Y(2 theta(k))`` factors into one
controlled ``R_Y`` per bit subset.

Pieces are selected with comparator flags ``k >= lo_i``. Piece ``i`` is
encoded as the difference ``p_i - p_{i-1}`` controlled on flag ``i`` alone;
the sum over set flags telescopes to the right piece.
"""
from __future__ import annotations

import csv
import itertools
import math
from collections import defaultdict
from decimal import Decimal
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import circuit as C
from .circuit import Circuit

ANGLE_TOL = 1e-8
_TWO_PI = Fraction(Decimal("6.28318530717958647692528676655900576839433879875021164194988918"))


class FitError(ValueError):
    pass


class EncodingError(ValueError):
    pass


# Multilinear algebra over bits -------------------------------------------
#
# Coefficients are exact rationals. Differenced pieces cancel large
# extrapolated terms, so float expansion would lose the small remainder;
# exact expansion followed by reduction mod 2 pi keeps every angle accurate.

Multilinear = dict  # frozenset of qubit labels -> Fraction


def _ml_mul(a: Multilinear, b: Multilinear) -> Multilinear:
    out: dict = defaultdict(int)
    for sa, ca in a.items():
        for sb, cb in b.items():
            out[sa | sb] += ca * cb
    return dict(out)


def _ml_add(a: Multilinear, b: Multilinear, scale=1) -> Multilinear:
    out = dict(a)
    for s, c in b.items():
        out[s] = out.get(s, 0) + scale * c
    return out


def _linear_form(qubits: Sequence, offset: float, scale: float) -> Multilinear:
    """``offset + scale * k`` with ``k`` the MSB-first integer on ``qubits``."""
    n = len(qubits)
    form = {frozenset(): Fraction(offset)} if offset else {}
    for s, q in enumerate(qubits):
        form[frozenset([q])] = Fraction(scale) * 2 ** (n - 1 - s)
    return form


def _powers(form: Multilinear, p: int) -> list[Multilinear]:
    out = [{frozenset(): Fraction(1)}]
    for _ in range(p):
        out.append(_ml_mul(out[-1], form))
    return out


def _exact_angles(coeffs, qubits, offset, scale) -> Multilinear:
    form = _linear_form(list(qubits), offset, scale)
    total: Multilinear = {}
    for c, pw in zip(coeffs, _powers(form, len(coeffs) - 1)):
        if c:
            total = _ml_add(total, pw, Fraction(c))
    return total


def _to_float(angles: Multilinear) -> dict:
    return {s: float(v) for s, v in angles.items()}


def reduce_angles(angles: Multilinear) -> dict:
    """Exact angles folded into ``(-pi, pi]`` as floats; ``R_Y(4 pi) = I`` makes this exact."""
    out = {}
    for s, v in angles.items():
        v = Fraction(v)
        r = v - _TWO_PI * round(v / _TWO_PI)
        if r:
            out[s] = float(r)
    return out


def multinomial_angles(coeffs: Sequence[float], n: int, offset: float = 0.0,
                       scale: float = 1.0, qubits: Sequence | None = None) -> dict:
    """Subset angles of ``sum_j coeffs[j] * (offset + scale*k)**j``.

    Returns ``{frozenset(bits): theta}`` so that summing ``theta`` over the
    subsets of set bits of ``k`` gives the polynomial value at ``k``. Keys are
    qubit positions ``0..n-1`` (0 is the MSB) unless ``qubits`` relabels them.
    """
    if qubits is None:
        qubits = range(n)
    return _to_float(_exact_angles(coeffs, qubits, offset, scale))


def bivariate_angles(coeffs: np.ndarray, q0: Sequence, q1: Sequence,
                     offset=(0.0, 0.0), scale=(1.0, 1.0)) -> dict:
    """Subset angles of ``sum_ab coeffs[a, b] t0**a t1**b`` with ``t_i`` affine in ``k_i``."""
    return _to_float(_exact_bivariate(coeffs, q0, q1, offset, scale))


def _exact_bivariate(coeffs, q0, q1, offset, scale) -> Multilinear:
    pa, pb = coeffs.shape
    pw0 = _powers(_linear_form(list(q0), offset[0], scale[0]), pa - 1)
    pw1 = _powers(_linear_form(list(q1), offset[1], scale[1]), pb - 1)
    total: Multilinear = {}
    for a in range(pa):
        for b in range(pb):
            if coeffs[a, b]:
                total = _ml_add(total, _ml_mul(pw0[a], pw1[b]), Fraction(float(coeffs[a, b])))
    return total


def subset_sum(angles: dict, bits_set: set) -> float:
    return sum(t for s, t in angles.items() if s <= bits_set)


# Univariate fits -----------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Polynomial on integers ``lo <= k < hi`` in the variable ``offset + scale*k``."""

    lo: int
    hi: int
    degree: int
    coeffs: tuple[float, ...]
    offset: float = 0.0
    scale: float = 1.0
    max_fit_error: float = 0.0

    def __call__(self, k):
        return npoly.polyval(self.offset + self.scale * np.asarray(k, dtype=float), self.coeffs)

    def raw_coeffs(self) -> np.ndarray:
        """Coefficients in powers of ``k`` itself."""
        return npoly.Polynomial(self.coeffs, domain=[-1, 1], window=[-1, 1])(
            npoly.Polynomial([self.offset, self.scale])
        ).coef


@dataclass(frozen=True)
class PiecewisePolynomial1D:
    segments: tuple[Segment, ...]
    degree: int

    @property
    def breakpoints(self) -> list[int]:
        return [s.lo for s in self.segments[1:]]

    def piece_index(self, k) -> np.ndarray:
        k = np.asarray(k)
        return np.searchsorted(np.asarray(self.breakpoints), k, side="right")

    def __call__(self, k):
        k = np.asarray(k)
        out = np.zeros(k.shape, dtype=float)
        idx = self.piece_index(k)
        for i, seg in enumerate(self.segments):
            m = idx == i
            out[m] = seg(k[m])
        return out


def geometric_partition(M: int, start: int = 1) -> list[tuple[int, int]]:
    """``[1,2), [2,4), ..., [M/2, M)``; finer near the origin."""
    out, lo = [], start
    while lo < M:
        hi = min(max(2 * lo, lo + 1), M)
        out.append((lo, hi))
        lo = hi
    return out


def uniform_partition(M: int, pieces: int, start: int = 1) -> list[tuple[int, int]]:
    edges = np.unique(np.linspace(start, M, pieces + 1).round().astype(int))
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def _fit_segment(target: Callable, lo: int, hi: int, p: int) -> Segment:
    k = np.arange(lo, hi, dtype=float)
    if len(k) < p + 1:
        raise FitError(f"segment [{lo},{hi}) has {len(k)} points, degree {p} needs {p + 1}")
    y = np.asarray(target(k), dtype=float)
    if len(k) == 1:
        return Segment(lo, hi, 0, (float(y[0]),), 0.0, 1.0, 0.0)
    # Map the segment onto [-1, 1] for conditioning.
    scale = 2.0 / (k[-1] - k[0])
    offset = -1.0 - scale * k[0]
    t = offset + scale * k
    V = npoly.polyvander(t, p)
    if np.linalg.matrix_rank(V) < p + 1:
        raise FitError(f"rank-deficient fit on [{lo},{hi}) at degree {p}")
    coeffs, *_ = np.linalg.lstsq(V, y, rcond=None)
    err = float(np.max(np.abs(V @ coeffs - y)))
    return Segment(lo, hi, p, tuple(float(c) for c in coeffs), float(offset), float(scale), err)


def fit_univariate(exact: Callable, segments: Sequence[tuple[int, int]], p: int,
                   scale: float = 1.0) -> PiecewisePolynomial1D:
    """Least-squares fit of ``arcsin(scale * exact(k))`` on each segment."""
    if p < 0:
        raise FitError("degree must be non-negative")
    target = _arcsin_target(exact, scale)
    segs = tuple(_fit_segment(target, lo, hi, p) for lo, hi in segments)
    return PiecewisePolynomial1D(segs, p)


def fit_piecewise(exact: Callable, segments: Sequence[tuple[int, int]], p: int,
                  scale: float = 1.0) -> PiecewisePolynomial1D:
    """Like :func:`fit_univariate` but lowers the degree on segments too short for ``p``."""
    target = _arcsin_target(exact, scale)
    segs = tuple(_fit_segment(target, lo, hi, min(p, hi - lo - 1)) for lo, hi in segments)
    return PiecewisePolynomial1D(segs, p)


def _arcsin_target(exact: Callable, scale: float) -> Callable:
    def target(k):
        v = scale * np.asarray(exact(k), dtype=float)
        if np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise EncodingError("scaled diagonal leaves [0, 1]")
        return np.arcsin(np.clip(v, 0.0, 1.0))
    return target


FIT_REPORT_COLUMNS = ("segment_lo", "segment_hi", "degree", "max_fit_error")


def fit_report_rows(fit) -> list[dict]:
    if isinstance(fit, PiecewisePolynomial1D):
        return [
            {"segment_lo": s.lo, "segment_hi": s.hi, "degree": s.degree, "max_fit_error": s.max_fit_error}
            for s in fit.segments
        ]
    rows = []
    for cell in fit.cells.values():
        if cell is not None:
            rows.append({
                "segment_lo": f"{cell.lo[0]}:{cell.lo[1]}",
                "segment_hi": f"{cell.hi[0]}:{cell.hi[1]}",
                "degree": cell.degree,
                "max_fit_error": cell.max_fit_error,
            })
    return rows


def write_fit_report(path, fit) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=FIT_REPORT_COLUMNS)
        w.writeheader()
        w.writerows(fit_report_rows(fit))


# Bivariate fits ------------------------------------------------------------

@dataclass(frozen=True)
class Cell2D:
    lo: tuple[int, int]
    hi: tuple[int, int]
    degree: int
    coeffs: np.ndarray = field(repr=False)
    offset: tuple[float, float] = (0.0, 0.0)
    scale: tuple[float, float] = (1.0, 1.0)
    max_fit_error: float = 0.0

    def __call__(self, k0, k1):
        t0 = self.offset[0] + self.scale[0] * np.asarray(k0, dtype=float)
        t1 = self.offset[1] + self.scale[1] * np.asarray(k1, dtype=float)
        return npoly.polyval2d(t0, t1, self.coeffs)


@dataclass(frozen=True)
class PiecewisePolynomial2D:
    """Cells ``(i, j)`` indexed by the piece along axis 0 and axis 1.

    ``None`` marks a cell encoded as the zero polynomial.
    """

    breaks0: tuple[int, ...]
    breaks1: tuple[int, ...]
    cells: dict
    degree: int

    def __call__(self, k0, k1):
        k0, k1 = np.broadcast_arrays(np.asarray(k0), np.asarray(k1))
        i0 = np.searchsorted(np.asarray(self.breaks0, dtype=int), k0, side="right")
        i1 = np.searchsorted(np.asarray(self.breaks1, dtype=int), k1, side="right")
        out = np.zeros(k0.shape, dtype=float)
        for (a, b), cell in self.cells.items():
            if cell is None:
                continue
            m = (i0 == a) & (i1 == b)
            out[m] = cell(k0[m], k1[m])
        return out


def _fit_cell(target: Callable, lo, hi, p: int) -> Cell2D:
    k0, k1 = np.meshgrid(np.arange(lo[0], hi[0]), np.arange(lo[1], hi[1]), indexing="ij")
    k0, k1 = k0.ravel().astype(float), k1.ravel().astype(float)
    y = np.asarray(target(k0, k1), dtype=float)
    offs, scls = [], []
    for a in range(2):
        span = hi[a] - 1 - lo[a]
        s = 2.0 / span if span > 0 else 1.0
        offs.append(-1.0 - s * lo[a] if span > 0 else -float(lo[a]))
        scls.append(s)
    t0, t1 = offs[0] + scls[0] * k0, offs[1] + scls[1] * k1
    deg = (min(p, hi[0] - lo[0] - 1), min(p, hi[1] - lo[1] - 1))
    V = npoly.polyvander2d(t0, t1, deg)
    if np.linalg.matrix_rank(V) < V.shape[1]:
        raise FitError(f"rank-deficient bivariate fit on cell {lo}-{hi}")
    c, *_ = np.linalg.lstsq(V, y, rcond=None)
    err = float(np.max(np.abs(V @ c - y)))
    coeffs = c.reshape(deg[0] + 1, deg[1] + 1)
    return Cell2D(tuple(lo), tuple(hi), p, coeffs, tuple(offs), tuple(scls), err)


def fit_bivariate(exact: Callable, breaks: Sequence[int], M: int, p: int, scale: float = 1.0,
                  fitted_cells=None, start: int = 1) -> PiecewisePolynomial2D:
    """Fit ``arcsin(scale * exact(k0, k1))`` on the tensor partition of ``[start, M)^2``.

    ``breaks`` are the interior cut points shared by both axes. Cells not in
    ``fitted_cells`` (default: all) are left as the zero polynomial.
    """
    breaks = tuple(b for b in breaks if start < b < M)
    edges = (start,) + breaks + (M,)
    n_cells = len(edges) - 1

    def target(k0, k1):
        v = scale * np.asarray(exact(k0, k1), dtype=float)
        if np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise EncodingError("scaled diagonal leaves [0, 1]")
        return np.arcsin(np.clip(v, 0.0, 1.0))

    cells = {}
    for a, b in itertools.product(range(n_cells), repeat=2):
        if fitted_cells is not None and (a, b) not in fitted_cells:
            cells[(a, b)] = None
            continue
        cells[(a, b)] = _fit_cell(target, (edges[a], edges[b]), (edges[a + 1], edges[b + 1]), p)
    return PiecewisePolynomial2D(breaks, breaks, cells, p)


# Spectral diagonals --------------------------------------------------------

@dataclass
class SpectralDiagonal:
    """Inverse-operator diagonal ``exact``, its scale ``s`` and the fitted encoding.

    ``encoded(k)`` is what the rotation qubit carries, ``sin(fit(k))``;
    ``fitted(k) = encoded(k) / s`` approximates ``exact(k)``.
    """

    exact: Callable
    scale: float
    fit: object
    n: int
    dim: int = 1

    def encoded(self, *k):
        return np.sin(self.fit(*k))

    def fitted(self, *k):
        return self.encoded(*k) / self.scale

    def encoded_grid(self) -> np.ndarray:
        k = np.arange(2**self.n)
        if self.dim == 1:
            return self.encoded(k)
        k0, k1 = np.meshgrid(k, k, indexing="ij")
        return self.encoded(k0, k1)

    def fitted_grid(self) -> np.ndarray:
        return self.encoded_grid() / self.scale


def make_diagonal_1d(exact: Callable, n: int, p: int, partition=None) -> SpectralDiagonal:
    M = 2**n
    if partition is None:
        partition = geometric_partition(M)
    kk = np.arange(1, M)
    s = 1.0 / float(np.max(exact(kk)))
    return SpectralDiagonal(exact, s, fit_piecewise(exact, partition, p, s), n, 1)


def make_diagonal_2d(exact: Callable, n: int, p: int, k_split: int,
                     fitted_cells=None) -> SpectralDiagonal:
    M = 2**n
    k0, k1 = np.meshgrid(np.arange(1, M), np.arange(1, M), indexing="ij")
    s = 1.0 / float(np.max(exact(k0, k1)))
    fit = fit_bivariate(exact, [k_split], M, p, s, fitted_cells)
    return SpectralDiagonal(exact, s, fit, n, 2)


# Comparators ---------------------------------------------------------------

def _is_pow2(t: int) -> bool:
    return t > 0 and t & (t - 1) == 0


def _carry_plan(n: int, threshold: int) -> list[str]:
    """Per LSB position ``i < n-1``: how carry ``i+1`` is held."""
    c = 2**n - threshold
    state, plan = "zero", []
    for i in range(n - 1):
        bit = (c >> i) & 1
        if bit == 0:
            state = "zero" if state == "zero" else "and"
        else:
            state = "alias" if state == "zero" else "or"
        plan.append(state)
    return plan


def comparator_carries(n: int, threshold: int) -> int:
    if _is_pow2(threshold):
        return 0
    return sum(1 for s in _carry_plan(n, threshold) if s in ("and", "or"))


def comparator_gates(data: Sequence[int], threshold: int, flag: int,
                     carries: Sequence[int]) -> list:
    """Gates flipping ``flag`` iff the integer on ``data`` is ``>= threshold``."""
    n = len(data)
    if not 0 < threshold < 2**n:
        raise ValueError(f"threshold {threshold} outside (0, {2**n})")
    bit = lambda i: data[n - 1 - i]  # LSB-indexed data qubit

    if _is_pow2(threshold):
        j = threshold.bit_length() - 1
        top = [bit(i) for i in range(n - 1, j - 1, -1)]
        if len(top) == 1:
            return [C.cnot(top[0], flag)]
        # flag = OR(top) = NOT AND(NOT top)
        return [C.mcx(top, flag, [0] * len(top)), C.x(flag)]

    c = 2**n - threshold

    def combine(op, k, cq, out):
        if op == "and":
            return [C.toffoli(k, cq, out)]
        return [C.cnot(k, out), C.cnot(cq, out), C.toffoli(k, cq, out)]

    compute, carry, used = [], None, 0
    for i, state in enumerate(_carry_plan(n, threshold)):
        if state == "zero":
            carry = None
        elif state == "alias":
            carry = bit(i)
        else:
            out = carries[used]
            used += 1
            compute += combine(state, bit(i), carry, out)
            carry = out
    top_bit = (c >> (n - 1)) & 1
    k = bit(n - 1)
    if carry is None:
        final = [C.cnot(k, flag)] if top_bit else []
    else:
        final = combine("or" if top_bit else "and", k, carry, flag)
    return compute + final + list(reversed(compute))


def build_comparator(n: int, threshold: int) -> Circuit:
    """``|k>|0> -> |k>|k >= threshold>``; layout ``data(n), flag, carries``."""
    nc = comparator_carries(n, threshold)
    circ = Circuit(n + 1 + nc, name=f"cmp{n}_{threshold}")
    circ.registers = {"data": tuple(range(n)), "flag": (n,), "carry": tuple(range(n + 1, n + 1 + nc))}
    circ.extend(comparator_gates(list(range(n)), threshold, n, list(range(n + 1, n + 1 + nc))))
    return circ


# Encoding circuits ---------------------------------------------------------

def _check_angles(values: np.ndarray) -> None:
    if np.any(values < -ANGLE_TOL) or np.any(values > math.pi / 2 + ANGLE_TOL):
        bad = values[(values < -ANGLE_TOL) | (values > math.pi / 2 + ANGLE_TOL)]
        raise EncodingError(f"rotation angle outside [0, pi/2]: {bad[:3]}")


def _rotation_gates(angles: Multilinear, rot: int, extra_controls=()) -> list:
    angles = reduce_angles(angles)
    gates = []
    for subset in sorted(angles, key=lambda s: (len(s), sorted(s))):
        theta = angles[subset]
        if theta == 0.0:
            continue
        ctl = tuple(extra_controls) + tuple((q, 1) for q in sorted(subset))
        gates.append(C.ry(2.0 * theta, rot, ctl))
    return gates


def _segment_angles(seg: Segment, data: Sequence[int]) -> Multilinear:
    return _exact_angles(seg.coeffs, data, seg.offset, seg.scale)


def up_univariate_gates(fit: PiecewisePolynomial1D, data: Sequence[int], rot: int,
                        flags: Sequence[int], carries: Sequence[int]) -> list:
    n = len(data)
    k = np.arange(2**n)
    vals = fit(k)
    _check_angles(vals[1:])
    bps = fit.breakpoints
    if len(flags) < len(bps):
        raise EncodingError(f"{len(bps)} flags needed, {len(flags)} given")
    cmp = []
    for t, f in zip(bps, flags):
        cmp += comparator_gates(data, t, f, carries)
    rot_gates = []
    prev = {}
    for i, seg in enumerate(fit.segments):
        cur = _segment_angles(seg, data)
        diff = _ml_add(cur, prev, -1)
        ctl = () if i == 0 else ((flags[i - 1], 1),)
        rot_gates += _rotation_gates(diff, rot, ctl)
        prev = cur
    return cmp + rot_gates + list(reversed(cmp))


def _up_layout(n_data: int, n_flags: int, n_carry: int) -> dict:
    d = tuple(range(n_data))
    r = n_data
    f = tuple(range(r + 1, r + 1 + n_flags))
    c = tuple(range(r + 1 + n_flags, r + 1 + n_flags + n_carry))
    return {"data": d, "rotation": (r,), "flags": f, "carry": c}


def build_up_univariate(diag: SpectralDiagonal, n: int | None = None) -> Circuit:
    """Encoding unitary; layout ``data(n), rotation, flags, carries``."""
    fit = diag.fit if isinstance(diag, SpectralDiagonal) else diag
    n = diag.n if n is None else n
    bps = fit.breakpoints
    n_carry = max((comparator_carries(n, t) for t in bps), default=0)
    regs = _up_layout(n, len(bps), n_carry)
    circ = Circuit(n + 1 + len(bps) + n_carry, name=f"up{n}", registers=regs)
    circ.extend(up_univariate_gates(fit, regs["data"], regs["rotation"][0], regs["flags"], regs["carry"]))
    return circ


def cell_angles(fit: PiecewisePolynomial2D, q0: Sequence[int], q1: Sequence[int]) -> dict:
    """Differenced subset angles per cell, exact rationals."""
    raw = {}
    for key, cell in fit.cells.items():
        raw[key] = {} if cell is None else _exact_bivariate(cell.coeffs, q0, q1, cell.offset, cell.scale)
    out = {}
    for (a, b) in fit.cells:
        d = dict(raw[(a, b)])
        for (da, db, sgn) in ((1, 0, -1), (0, 1, -1), (1, 1, 1)):
            other = raw.get((a - da, b - db))
            if other is not None and a - da >= 0 and b - db >= 0:
                d = _ml_add(d, other, sgn)
        out[(a, b)] = d
    return out


def up_bivariate_gates(fit: PiecewisePolynomial2D, q0: Sequence[int], q1: Sequence[int],
                       rot: int, flags0: Sequence[int], flags1: Sequence[int],
                       carries: Sequence[int]) -> list:
    n = len(q0)
    k = np.arange(2**n)
    K0, K1 = np.meshgrid(k, k, indexing="ij")
    _check_angles(fit(K0, K1)[1:, 1:])
    cmp = []
    for t, f in zip(fit.breaks0, flags0):
        cmp += comparator_gates(q0, t, f, carries)
    for t, f in zip(fit.breaks1, flags1):
        cmp += comparator_gates(q1, t, f, carries)
    rot_gates = []
    for (a, b), ang in cell_angles(fit, q0, q1).items():
        ctl = []
        if a > 0:
            ctl.append((flags0[a - 1], 1))
        if b > 0:
            ctl.append((flags1[b - 1], 1))
        rot_gates += _rotation_gates(ang, rot, ctl)
    return cmp + rot_gates + list(reversed(cmp))


def build_up_bivariate(diag: SpectralDiagonal, n_per_axis: int | None = None) -> Circuit:
    """Layout ``k1 data(n), k0 data(n), rotation, flags0, flags1, carries``."""
    fit = diag.fit
    n = diag.n if n_per_axis is None else n_per_axis
    nf0, nf1 = len(fit.breaks0), len(fit.breaks1)
    n_carry = max((comparator_carries(n, t) for t in fit.breaks0 + fit.breaks1), default=0)
    q1 = tuple(range(n))
    q0 = tuple(range(n, 2 * n))
    rot = 2 * n
    f0 = tuple(range(rot + 1, rot + 1 + nf0))
    f1 = tuple(range(rot + 1 + nf0, rot + 1 + nf0 + nf1))
    carry = tuple(range(rot + 1 + nf0 + nf1, rot + 1 + nf0 + nf1 + n_carry))
    circ = Circuit(rot + 1 + nf0 + nf1 + n_carry, name=f"up2d{n}")
    circ.registers = {"k1": q1, "k0": q0, "rotation": (rot,), "flags": f0 + f1, "carry": carry}
    circ.extend(up_bivariate_gates(fit, q0, q1, rot, f0, f1, carry))
    return circ
