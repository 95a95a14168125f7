import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lindpert.linalg import (
    BipartiteDims,
    as_matrix,
    devectorize,
    expm,
    hs_inner,
    is_density,
    is_hermitian,
    null_space,
    partial_trace,
    partial_transpose,
    vectorize,
)

from conftest import random_density, random_unitary

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=5)


def _cmat(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


@given(seeds, dims)
def test_vec_of_product_is_kron(seed, d):
    rng = np.random.default_rng(seed)
    a, x, b = _cmat(rng, d), _cmat(rng, d), _cmat(rng, d)
    assert np.allclose(vectorize(a @ x @ b), np.kron(b.T, a) @ vectorize(x), atol=1e-10)


@given(seeds, dims)
def test_devectorize_inverts_vectorize(seed, d):
    x = _cmat(np.random.default_rng(seed), d)
    assert np.array_equal(devectorize(vectorize(x)), x)


def test_column_stacking_convention():
    x = np.array([[1, 2], [3, 4]])
    assert list(vectorize(x)) == [1, 3, 2, 4]


def test_as_matrix_rejects_non_square():
    with pytest.raises(ValueError):
        as_matrix(np.zeros((2, 3)))


def test_hs_inner_is_trace_pairing(rng):
    a, b = _cmat(rng, 3), _cmat(rng, 3)
    assert np.isclose(hs_inner(a, b), np.trace(a.conj().T @ b))


def test_hermitian_and_density_predicates(rng):
    rho = random_density(3, rng)
    assert is_hermitian(rho) and is_density(rho)
    assert not is_density(rho + 0.1 * np.eye(3))
    assert not is_density(np.diag([1.5, -0.5, 0.0]))
    assert not is_hermitian(np.array([[0, 1], [0, 0]]))


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_partial_transpose_involution_and_trace(seed, d1, d2):
    rng = np.random.default_rng(seed)
    dims = BipartiteDims(d1, d2)
    x = _cmat(rng, d1 * d2)
    for party in (1, 2):
        pt = partial_transpose(x, dims, party)
        assert np.allclose(partial_transpose(pt, dims, party), x)
        assert np.isclose(np.trace(pt), np.trace(x))
    full = partial_transpose(partial_transpose(x, dims, 1), dims, 2)
    assert np.allclose(full, x.T)


def test_partial_transpose_of_product():
    rng = np.random.default_rng(3)
    a, b = _cmat(rng, 2), _cmat(rng, 3)
    dims = BipartiteDims(2, 3)
    assert np.allclose(partial_transpose(np.kron(a, b), dims, 2), np.kron(a, b.T))
    assert np.allclose(partial_transpose(np.kron(a, b), dims, 1), np.kron(a.T, b))


def test_partial_trace_of_product():
    rng = np.random.default_rng(4)
    a, b = random_density(2, rng), random_density(3, rng)
    dims = BipartiteDims(2, 3)
    assert np.allclose(partial_trace(np.kron(a, b), dims, 2), a)
    assert np.allclose(partial_trace(np.kron(a, b), dims, 1), b)


def test_bipartite_dims_validation():
    with pytest.raises(ValueError):
        BipartiteDims(0, 2)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(3), BipartiteDims(2, 2))


def test_null_space_rank_and_orthonormality(rng):
    a = _cmat(rng, 6)[:, :4] @ _cmat(rng, 6)[:4, :]
    k = null_space(a)
    assert k.shape == (6, 2)
    assert np.allclose(k.conj().T @ k, np.eye(2), atol=1e-12)
    assert np.abs(a @ k).max() < 1e-10


def test_null_space_absolute_scale():
    tiny = 1e-17 * np.array([[1.0, 2.0], [0.5, -1.0]])
    assert null_space(tiny).shape[1] == 0
    assert null_space(tiny, scale=1.0).shape[1] == 2
    assert null_space(np.zeros((3, 3))).shape[1] == 3


def _taylor_expm(m, terms=60):
    # independent oracle: plain Taylor series on a scaled-down matrix, then squaring
    s = max(0, int(np.ceil(np.log2(max(1.0, np.abs(m).sum(axis=1).max())))) + 2)
    a = m / 2**s
    out = np.eye(m.shape[0], dtype=np.complex128)
    term = out.copy()
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


@given(seeds, st.integers(1, 4), st.floats(0.01, 5.0))
def test_expm_matches_taylor_oracle(seed, d, scale):
    m = scale * _cmat(np.random.default_rng(seed), d)
    ref = _taylor_expm(m)
    assert np.abs(expm(m) - ref).max() <= 1e-9 * max(1.0, np.abs(ref).max())


def test_expm_of_hermitian_generator_is_unitary(rng):
    h = _cmat(rng, 4)
    h = h + h.conj().T
    u = expm(-1j * h)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
    v = random_unitary(3, rng)
    assert np.allclose(v @ v.conj().T, np.eye(3))
