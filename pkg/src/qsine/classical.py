"""Classical spectral solvers, diagonals, lifting and Matérn covariance.

Grids: the physical domain ``[0, L)`` holds ``M = N/2`` points
``x_k = k L / M``; the antisymmetric extension doubles it to ``N`` points.
Sample 0 is the Dirichlet boundary and is always zero in a homogeneous
problem.

With ``S`` the orthonormal DST-I on indices ``1..M-1`` (row and column 0 are
zero), the folded solve is ``u = S diag(d) S f`` where ``d = 1/D`` and
``d(0) = 0``. The same result through the extended grid is
``u = (1/4) R^T F^dg R diag(d) R^T F R f``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft
import scipy.special


class PreconditionError(ValueError):
    pass


class LiftError(ValueError):
    pass


POISSON = "poisson"
FRACTIONAL = "fractional"


@dataclass
class ProblemSpec:
    """A homogeneous Dirichlet problem on ``[0, L)^dim`` sampled on ``M`` points per axis."""

    family: str
    dim: int
    L: float
    M: int
    forcing: np.ndarray = field(repr=False)
    kappa: float = 0.0
    beta: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if self.family not in (POISSON, FRACTIONAL):
            raise ValueError(f"unknown family {self.family!r}")
        if self.M < 2 or self.M & (self.M - 1):
            raise ValueError(f"points per axis must be a power of two >= 2, got {self.M}")
        self.forcing = np.asarray(self.forcing, dtype=float)
        if self.forcing.shape != (self.M,) * self.dim:
            raise ValueError(f"forcing shape {self.forcing.shape} != {(self.M,) * self.dim}")

    @property
    def N(self) -> int:
        return 2 * self.M

    @property
    def h(self) -> float:
        return self.L / self.M

    def grid(self) -> np.ndarray:
        return grid_points(self.M, self.L)

    def inverse_diagonal(self) -> Callable:
        if self.dim == 1:
            if self.family == POISSON:
                return inverse_poisson(self.L)
            return inverse_fractional(self.L, self.kappa, self.beta, self.tau)
        if self.family == POISSON:
            return inverse_poisson_2d(self.L)
        return inverse_fractional_2d(self.L, self.kappa, self.beta, self.tau)

    def with_forcing(self, forcing) -> "ProblemSpec":
        return ProblemSpec(self.family, self.dim, self.L, self.M, forcing, self.kappa, self.beta, self.tau)


@dataclass
class SpectralSolution:
    u: np.ndarray
    fourier_coeffs: np.ndarray


def grid_points(M: int, L: float = 1.0) -> np.ndarray:
    return np.arange(M) * (L / M)


def extend_antisymmetric(f) -> np.ndarray:
    f = np.asarray(f)
    if f[0] != 0:
        raise PreconditionError("boundary sample f[0] must be zero")
    M = len(f)
    ext = np.zeros(2 * M, dtype=f.dtype)
    ext[1:M] = f[1:]
    ext[M + 1:] = -f[1:][::-1]
    return ext


# Diagonals -----------------------------------------------------------------

def diagonal_poisson_1d(N: int, L: float = 1.0) -> np.ndarray:
    k = np.arange(N // 2)
    return (math.pi / L) ** 2 * np.maximum(k, 1) ** 2.0


def diagonal_fractional_1d(N: int, L: float, kappa: float, beta: float, tau: float) -> np.ndarray:
    k = np.arange(N // 2)
    return tau * (kappa**2 + (k * math.pi / L) ** 2) ** beta


def inverse_poisson(L: float = 1.0) -> Callable:
    def d(k):
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(k > 0, (L / (math.pi * k)) ** 2, 0.0)
    return d


def inverse_fractional(L: float, kappa: float, beta: float, tau: float) -> Callable:
    def d(k):
        k = np.asarray(k, dtype=float)
        v = 1.0 / (tau * (kappa**2 + (k * math.pi / L) ** 2) ** beta)
        return np.where(k > 0, v, 0.0)
    return d


def inverse_poisson_2d(L: float = 1.0) -> Callable:
    def d(k0, k1):
        k0, k1 = np.asarray(k0, dtype=float), np.asarray(k1, dtype=float)
        inside = (k0 > 0) & (k1 > 0)
        with np.errstate(divide="ignore"):
            return np.where(inside, (L / math.pi) ** 2 / (k0**2 + k1**2), 0.0)
    return d


def inverse_fractional_2d(L: float, kappa: float, beta: float, tau: float) -> Callable:
    def d(k0, k1):
        k0, k1 = np.asarray(k0, dtype=float), np.asarray(k1, dtype=float)
        v = 1.0 / (tau * (kappa**2 + (math.pi / L) ** 2 * (k0**2 + k1**2)) ** beta)
        return np.where((k0 > 0) & (k1 > 0), v, 0.0)
    return d


def diagonal_2d(family: str, N: int, L: float = 1.0, kappa: float = 0.0,
                beta: float = 1.0, tau: float = 1.0) -> np.ndarray:
    """Inverse-operator values ``d(k0, k1)`` on ``[0, N/2)^2``, zero on the axes."""
    k = np.arange(N // 2)
    k0, k1 = np.meshgrid(k, k, indexing="ij")
    if family == POISSON:
        return inverse_poisson_2d(L)(k0, k1)
    return inverse_fractional_2d(L, kappa, beta, tau)(k0, k1)


# Transforms ----------------------------------------------------------------

def dst(x: np.ndarray, axes=None) -> np.ndarray:
    """Orthonormal DST-I on indices ``1..M-1`` of each axis; index 0 maps to 0."""
    x = np.asarray(x, dtype=float)
    axes = range(x.ndim) if axes is None else axes
    out = x.copy()
    for ax in axes:
        inner = [slice(None)] * x.ndim
        inner[ax] = slice(1, None)
        zero = [slice(None)] * x.ndim
        zero[ax] = 0
        res = np.zeros_like(out)
        res[tuple(inner)] = scipy.fft.dst(out[tuple(inner)], type=1, norm="ortho", axis=ax)
        res[tuple(zero)] = 0.0
        out = res
    return out


def dst_matrix(M: int) -> np.ndarray:
    j = np.arange(M)
    S = np.sqrt(2.0 / M) * np.sin(np.pi * np.outer(j, j) / M)
    return S


def _exact_values(spec: ProblemSpec) -> np.ndarray:
    k = np.arange(spec.M)
    d = spec.inverse_diagonal()
    if spec.dim == 1:
        return d(k)
    k0, k1 = np.meshgrid(k, k, indexing="ij")
    return d(k0, k1)


def solve_classical(spec: ProblemSpec, diag_values: np.ndarray | None = None,
                    method: str = "dst") -> SpectralSolution:
    """Spectral solve; ``diag_values`` overrides the exact inverse diagonal."""
    d = _exact_values(spec) if diag_values is None else np.asarray(diag_values, dtype=float)
    f = spec.forcing.copy()
    zero = [slice(None)] * spec.dim
    for ax in range(spec.dim):
        idx = list(zero)
        idx[ax] = 0
        f[tuple(idx)] = 0.0
    if method == "dst":
        fhat = dst(f)
        return SpectralSolution(dst(d * fhat), fhat)
    if method == "extended":
        return _solve_extended(f, d)
    raise ValueError(f"unknown method {method!r}")


def _solve_extended(f: np.ndarray, d: np.ndarray) -> SpectralSolution:
    """Through the doubled grid and unitary DFTs, ``(1/4) R^T F^dg R d R^T F R`` per axis."""
    M = f.shape[0]
    N = 2 * M

    def fold(x, ax):
        # R^T F R along one axis: extend, transform, restrict.
        x = np.moveaxis(x, ax, 0)
        ext = np.zeros((N,) + x.shape[1:], dtype=complex)
        ext[1:M] = x[1:]
        ext[M + 1:] = -x[1:][::-1]
        return ext

    def restrict(y):
        out = np.zeros((M,) + y.shape[1:], dtype=complex)
        out[1:] = y[1:M] - y[N - 1:M:-1]
        return out

    g = f.astype(complex)
    for ax in range(f.ndim):
        e = fold(g, ax)
        y = restrict(np.fft.ifft(e, axis=0, norm="ortho"))
        g = np.moveaxis(y, 0, ax)
    fhat = g
    g = fhat * d
    for ax in range(f.ndim):
        e = fold(g, ax)
        y = restrict(np.fft.fft(e, axis=0, norm="ortho"))
        g = np.moveaxis(y, 0, ax)
    scale = 0.25**f.ndim
    return SpectralSolution(np.real(g) * scale, fhat * (0.5 / 1j) ** f.ndim)


# Lifting -------------------------------------------------------------------

@dataclass
class LiftedProblem:
    spec: ProblemSpec
    g_grid: np.ndarray

    def reconstruct(self, v: np.ndarray) -> np.ndarray:
        return v + self.g_grid


def lift_inhomogeneous(spec: ProblemSpec, g: Callable, lap_g: Callable,
                       boundary: dict | None = None, atol: float = 1e-12) -> LiftedProblem:
    """Replace the forcing by ``f + lap(g)`` so that ``u = v + g`` with ``v`` homogeneous.

    ``boundary`` maps boundary coordinates to prescribed values; ``g`` must
    reproduce them. In 1D keys are ``x`` values; in 2D they are ``(x0, x1)``.
    """
    x = spec.grid()
    if spec.dim == 1:
        gg, lg = g(x), lap_g(x)
    else:
        X0, X1 = np.meshgrid(x, x, indexing="ij")
        gg, lg = g(X0, X1), lap_g(X0, X1)
    for where, value in (boundary or {}).items():
        got = g(*where) if isinstance(where, tuple) else g(where)
        if abs(got - value) > atol:
            raise LiftError(f"lift g({where}) = {got} but boundary value is {value}")
    forcing = spec.forcing + np.broadcast_to(lg, spec.forcing.shape)
    return LiftedProblem(spec.with_forcing(forcing), np.broadcast_to(gg, spec.forcing.shape).copy())


def l2_error(u: np.ndarray, ref: np.ndarray, h: float) -> float:
    e = np.asarray(u) - np.asarray(ref)
    return float(np.sqrt(h ** e.ndim * np.sum(e**2)))


# Model problems ------------------------------------------------------------

def forcing_poisson_1d(x):
    return 100.0 * np.cos(2 * np.pi * x) * np.cos(5 * np.pi * x)


def exact_poisson_1d(x):
    x = np.asarray(x, dtype=float)
    return 100.0 * (-58 + 116 * x + 49 * np.cos(3 * np.pi * x) + 9 * np.cos(7 * np.pi * x)) / (882 * np.pi**2)


def exact_poisson_1d_inhom(x):
    return 0.5 * (np.asarray(x) + 1) + exact_poisson_1d(x)


def lift_1d(x):
    x = np.asarray(x, dtype=float)
    return -0.5 * (x - 1) ** 3 + x**3


def lift_1d_second_derivative(x):
    return 3.0 * np.asarray(x, dtype=float) + 3.0


def forcing_poisson_2d(x0, x1):
    return (
        13 * np.pi**2 * np.sin(2 * np.pi * x0) * np.sin(3 * np.pi * x1)
        + 17 * np.pi**2 * np.sin(np.pi * x0) * np.sin(4 * np.pi * x1)
        - 9 * x0 - 15 * x1
    )


def lift_2d(x0, x1):
    return 0.5 * (3 * np.asarray(x0) ** 2 + 5 * np.asarray(x1) ** 2 + 1)


def lift_2d_laplacian(x0, x1):
    return np.full(np.broadcast(np.asarray(x0), np.asarray(x1)).shape, 8.0)


def poisson_1d_spec(M: int, L: float = 1.0) -> ProblemSpec:
    f = forcing_poisson_1d(grid_points(M, L))
    f[0] = 0.0
    return ProblemSpec(POISSON, 1, L, M, f)


def poisson_1d_inhom_problem(M: int) -> LiftedProblem:
    x = grid_points(M)
    spec = ProblemSpec(POISSON, 1, 1.0, M, forcing_poisson_1d(x))
    lifted = lift_inhomogeneous(spec, lift_1d, lift_1d_second_derivative, {0.0: 0.5, 1.0: 1.0})
    lifted.spec.forcing[0] = 0.0
    return lifted


def poisson_2d_problem(M: int) -> LiftedProblem:
    x = grid_points(M)
    X0, X1 = np.meshgrid(x, x, indexing="ij")
    spec = ProblemSpec(POISSON, 2, 1.0, M, forcing_poisson_2d(X0, X1))
    boundary = {(0.0, 0.3): 0.5 + 2.5 * 0.3**2, (1.0, 0.3): 2.0 + 2.5 * 0.3**2,
                (0.4, 0.0): 0.5 + 1.5 * 0.4**2, (0.4, 1.0): 3.0 + 1.5 * 0.4**2}
    lifted = lift_inhomogeneous(spec, lift_2d, lift_2d_laplacian, boundary)
    lifted.spec.forcing[0, :] = 0.0
    lifted.spec.forcing[:, 0] = 0.0
    return lifted


def poisson_2d_reference(M_ref: int = 512) -> np.ndarray:
    """High-resolution classical solution ``u = v + g`` on the ``M_ref^2`` grid."""
    lifted = poisson_2d_problem(M_ref)
    return lifted.reconstruct(solve_classical(lifted.spec).u)


def subsample(ref: np.ndarray, M: int) -> np.ndarray:
    step = ref.shape[0] // M
    return ref[(slice(None, None, step),) * ref.ndim]


# Matérn fields -------------------------------------------------------------

def matern_covariance(r, nu: float, ell: float):
    r = np.abs(np.asarray(r, dtype=float))
    z = math.sqrt(2 * nu) * r / ell
    with np.errstate(invalid="ignore"):
        c = (2 ** (1 - nu) / scipy.special.gamma(nu)) * z**nu * scipy.special.kv(nu, z)
    return np.where(z == 0, 1.0, c)


def spde_params(nu: float, ell: float, d: int) -> tuple[float, float, float]:
    """``(kappa, beta, tau)`` whose SPDE solution has unit-variance Matérn covariance."""
    kappa = math.sqrt(2 * nu) / ell
    beta = nu / 2 + d / 4
    tau2 = math.gamma(nu) / (math.gamma(nu + d / 2) * (4 * math.pi) ** (d / 2) * kappa ** (2 * nu))
    return kappa, beta, math.sqrt(tau2)


def marginal_variance(kappa: float, beta: float, tau: float, d: int) -> float:
    """Pointwise variance of the stationary field for the given SPDE parameters."""
    nu = 2 * beta - d / 2
    ell = math.sqrt(2 * nu) / kappa
    return spde_params(nu, ell, d)[2] ** 2 / tau**2


def _fractional_values(M: int, L: float, kappa, beta, tau, dim) -> np.ndarray:
    k = np.arange(M)
    if dim == 1:
        return inverse_fractional(L, kappa, beta, tau)(k)
    k0, k1 = np.meshgrid(k, k, indexing="ij")
    return inverse_fractional_2d(L, kappa, beta, tau)(k0, k1)


def covariance_matrix(spec: ProblemSpec, noise_variance: float | None = None,
                      diag_values: np.ndarray | None = None) -> np.ndarray:
    """Covariance ``sigma^2 S d^2 S`` of the discrete solution driven by white noise.

    The default noise variance ``1/h^dim`` is the grid version of unit white
    noise, which makes rows converge to the continuum covariance.
    """
    if spec.family != FRACTIONAL:
        raise ValueError("covariance is defined for the fractional family")
    if noise_variance is None:
        noise_variance = spec.h ** (-spec.dim)
    d = _exact_values(spec) if diag_values is None else diag_values
    if spec.dim == 1:
        S = dst_matrix(spec.M)
    else:
        S1 = dst_matrix(spec.M)
        S = np.kron(S1, S1)
    d2 = np.ravel(d) ** 2
    return noise_variance * (S * d2) @ S.T


def covariance_row(spec: ProblemSpec, index, noise_variance: float | None = None,
                   diag_values: np.ndarray | None = None) -> np.ndarray:
    """One row of :func:`covariance_matrix` via fast transforms."""
    if noise_variance is None:
        noise_variance = spec.h ** (-spec.dim)
    d = _exact_values(spec) if diag_values is None else np.asarray(diag_values)
    e = np.zeros((spec.M,) * spec.dim)
    e[index] = 1.0
    return noise_variance * dst(d**2 * dst(e))


def matern_reference_row(spec: ProblemSpec, index) -> np.ndarray:
    """Continuum covariance against the point ``index``, scaled to the SPDE variance."""
    x = spec.grid()
    nu = 2 * spec.beta - spec.dim / 2
    ell = math.sqrt(2 * nu) / spec.kappa
    var = marginal_variance(spec.kappa, spec.beta, spec.tau, spec.dim)
    if spec.dim == 1:
        r = np.abs(x - x[index])
    else:
        X0, X1 = np.meshgrid(x, x, indexing="ij")
        r = np.hypot(X0 - x[index[0]], X1 - x[index[1]])
    return var * matern_covariance(r, nu, ell)


def relative_l2(a: np.ndarray, ref: np.ndarray) -> float:
    return float(np.linalg.norm(np.ravel(a) - np.ravel(ref)) / np.linalg.norm(np.ravel(ref)))


def sample_white_noise(M: int, tau: float, seed, dim: int = 1) -> np.ndarray:
    """Independent ``N(0, 1/tau^2) / M`` samples, zero on the boundary indices."""
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((M,) * dim) / (tau * M)
    for ax in range(dim):
        idx = [slice(None)] * dim
        idx[ax] = 0
        f[tuple(idx)] = 0.0
    return f
