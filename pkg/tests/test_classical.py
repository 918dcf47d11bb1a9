import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsine import classical as cl


def test_dst_matrix_orthonormal_and_symmetric():
    S = cl.dst_matrix(16)
    assert np.allclose(S, S.T)
    assert np.allclose(S[1:, 1:] @ S[1:, 1:], np.eye(15))


@given(st.integers(2, 7), st.integers(0, 2**31 - 1))
def test_fast_dst_matches_matrix(n, seed):
    M = 2**n
    f = np.random.default_rng(seed).normal(size=M)
    f[0] = 0
    assert np.allclose(cl.dst(f), cl.dst_matrix(M) @ f, atol=1e-12)


def test_antisymmetric_extension():
    ext = cl.extend_antisymmetric([0.0, 1.0, 2.0, 3.0])
    assert list(ext) == [0, 1, 2, 3, 0, -3, -2, -1]
    with pytest.raises(cl.PreconditionError):
        cl.extend_antisymmetric([7.0, 1.0, 2.0, 3.0])


def test_poisson_diagonal_values():
    d = cl.diagonal_poisson_1d(8, 1.0)
    # k = 0 is held at 1 so the matrix stays invertible
    assert np.allclose(d, np.pi**2 * np.array([1, 1, 4, 9]))


def test_fractional_diagonal_example():
    d = cl.diagonal_fractional_1d(8, 1.0, 40.0, 1.0, 4.279e-5)
    assert d[0] == pytest.approx(6.846e-2, rel=1e-3)
    half = cl.diagonal_fractional_1d(8, 1.0, 40.0, 0.5, 4.279e-5)
    assert np.allclose(half**2, 4.279e-5 * d)


def test_sine_mode_solved_exactly():
    M = 32
    x = cl.grid_points(M)
    spec = cl.ProblemSpec(cl.POISSON, 1, 1.0, M, (3 * np.pi) ** 2 * np.sin(3 * np.pi * x))
    assert np.allclose(cl.solve_classical(spec).u, np.sin(3 * np.pi * x), atol=1e-12)


def test_second_order_convergence_of_model_problem():
    errs = []
    for M in (64, 128, 256):
        spec = cl.poisson_1d_spec(M)
        errs.append(cl.l2_error(cl.solve_classical(spec).u, cl.exact_poisson_1d(cl.grid_points(M)), spec.h))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_model_solutions_meet_boundary():
    assert cl.exact_poisson_1d(0.0) == pytest.approx(0, abs=1e-12)
    assert cl.exact_poisson_1d(1.0) == pytest.approx(0, abs=1e-12)
    assert cl.exact_poisson_1d_inhom(0.0) == pytest.approx(0.5)
    assert cl.exact_poisson_1d_inhom(1.0) == pytest.approx(1.0)
    assert cl.lift_1d(0.0) == pytest.approx(0.5) and cl.lift_1d(1.0) == pytest.approx(1.0)


def test_lift_rejects_mismatched_boundary():
    spec = cl.poisson_1d_spec(8)
    with pytest.raises(cl.LiftError):
        cl.lift_inhomogeneous(spec, cl.lift_1d, cl.lift_1d_second_derivative, {0.0: 0.0})


@given(st.sampled_from([0.5, 1.5, 2.5]), st.floats(0.05, 1.0))
def test_spde_params_roundtrip(nu, ell):
    kappa, beta, tau = cl.spde_params(nu, ell, 1)
    assert kappa == pytest.approx(math.sqrt(2 * nu) / ell)
    assert cl.marginal_variance(kappa, beta, tau, 1) == pytest.approx(1.0)


def test_matern_half_is_exponential():
    r = np.linspace(0, 2, 9)
    assert np.allclose(cl.matern_covariance(r, 0.5, 0.3), np.exp(-r / 0.3))


def test_covariance_row_is_matrix_row():
    spec = cl.ProblemSpec(cl.FRACTIONAL, 1, 1.0, 32, np.zeros(32), 40.0, 1.0, 4.279e-5)
    assert np.allclose(cl.covariance_row(spec, 16), cl.covariance_matrix(spec)[16])


def test_white_noise_statistics():
    M, tau = 2**15, 0.5
    f = cl.sample_white_noise(M, tau, seed=1)
    assert f[0] == 0
    assert np.var(M * f[1:]) == pytest.approx(1 / tau**2, rel=0.05)


def test_white_noise_deterministic():
    assert np.array_equal(cl.sample_white_noise(64, 1.0, 7, dim=2), cl.sample_white_noise(64, 1.0, 7, dim=2))


def test_bad_spec_rejected():
    with pytest.raises(ValueError):
        cl.ProblemSpec(cl.POISSON, 1, 1.0, 12, np.zeros(12))
    with pytest.raises(ValueError):
        cl.ProblemSpec("heat", 1, 1.0, 8, np.zeros(8))
