import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsine import classical as cl
from qsine.solver import (
    ConfigurationError,
    build_diagonal,
    quantum_covariance_row,
    quantum_solve,
    quantum_solve_batch,
    sample_random_field_quantum,
)


def _frac1d(M, f=None):
    f = np.zeros(M) if f is None else f
    return cl.ProblemSpec(cl.FRACTIONAL, 1, 1.0, M, f, 40.0, 1.0, 4.279e-5)


def _extended(spec, res):
    return cl.solve_classical(spec, diag_values=res.diag.fitted_grid(), method="extended").u


@given(st.sampled_from([8, 16, 32]), st.sampled_from(["mcx", "ripple"]), st.integers(0, 2**31 - 1))
def test_matches_extended_solve(M, impl, seed):
    f = np.random.default_rng(seed).normal(size=M)
    spec = _frac1d(M, f)
    res = quantum_solve(spec, p=3, shift_impl=impl)
    assert np.max(np.abs(res.u - _extended(spec, res))) <= 1e-9


def test_zero_forcing_gives_zero():
    res = quantum_solve(cl.poisson_1d_spec(8).with_forcing(np.zeros(8)))
    assert not np.any(res.u)
    assert res.success_probability == 0.0


def test_scale_chain_and_probability():
    spec = cl.poisson_1d_spec(32)
    res = quantum_solve(spec, keep_state=True)
    names = [name for name, _ in res.scale_chain]
    assert names == ["input_norm", "inverse_diagonal_scale"]
    assert 0 < res.success_probability < 1
    assert res.raw_state.norm() == pytest.approx(1.0)


@given(st.integers(0, 2**31 - 1))
def test_linearity_in_forcing(seed):
    rng = np.random.default_rng(seed)
    M = 16
    a, b = rng.normal(size=M), rng.normal(size=M)
    spec = _frac1d(M)
    diag = build_diagonal(spec, 3)
    ua = quantum_solve(spec.with_forcing(a), diag=diag).u
    ub = quantum_solve(spec.with_forcing(b), diag=diag).u
    uab = quantum_solve(spec.with_forcing(2 * a - b), diag=diag).u
    assert np.allclose(uab, 2 * ua - ub, atol=1e-10)


def test_batch_matches_single_solves():
    M = 16
    rng = np.random.default_rng(3)
    F = rng.normal(size=(M, 4))
    F[0] = 0
    spec = _frac1d(M)
    diag = build_diagonal(spec, 4)
    batch = quantum_solve_batch(spec, F, diag=diag)
    for b in range(4):
        assert np.allclose(batch[:, b], quantum_solve(spec.with_forcing(F[:, b]), diag=diag).u, atol=1e-12)


def test_two_dimensional_equivalence():
    M = 8
    spec = cl.ProblemSpec(cl.FRACTIONAL, 2, 1.0, M, np.random.default_rng(0).normal(size=(M, M)),
                          10 / math.sqrt(2), 1.0, 0.01995)
    res = quantum_solve(spec, p=3, k_split=4)
    assert np.max(np.abs(res.u - _extended(spec, res))) <= 1e-9


def test_covariance_row_matches_fitted_classical():
    spec = _frac1d(32)
    diag = build_diagonal(spec, 4)
    q = quantum_covariance_row(spec, 16, diag=diag)
    c = cl.covariance_row(spec, 16, diag_values=diag.fitted_grid())
    assert np.allclose(q, c, rtol=1e-9, atol=1e-12 * np.max(np.abs(c)))


def test_covariance_needs_fractional():
    with pytest.raises(ConfigurationError):
        quantum_covariance_row(cl.poisson_1d_spec(8), 4)
    with pytest.raises(ConfigurationError):
        sample_random_field_quantum(cl.poisson_1d_spec(8), 2, seed=0)


def test_samples_deterministic():
    spec = _frac1d(16)
    a = sample_random_field_quantum(spec, 3, seed=11, p=3)
    b = sample_random_field_quantum(spec, 3, seed=11, p=3)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@pytest.mark.slow
def test_sampled_covariance_matches_recipe():
    # White noise here has variance 1/(tau M)^2 per point, so that is the matching prefactor.
    M, n = 64, 10_000
    spec = _frac1d(M)
    diag = build_diagonal(spec, 4)
    u = np.stack(sample_random_field_quantum(spec, n, seed=2024, diag=diag), axis=1)
    emp = u @ u.T / n
    ref = cl.covariance_matrix(spec, noise_variance=1 / (spec.tau * M) ** 2, diag_values=diag.fitted_grid())
    assert np.linalg.norm(emp - ref) / np.linalg.norm(ref) < 0.10
