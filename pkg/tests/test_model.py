import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lindpert import _backend
from lindpert.errors import ValidationError
from lindpert.linalg import dagger, devectorize, is_density, vectorize
from lindpert.model import (
    LindbladSpec,
    Superop,
    build_dual,
    build_generator,
    combine,
    dual_matrix,
    evolve,
    propagator,
    swap_matrix,
)
from lindpert.scenarios import random_instance

from conftest import random_density

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _spec(seed, d, n_jumps=2):
    return random_instance(d, n_jumps, seed=seed).l0spec


def _full_basis(d):
    for j in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[j, k] = 1.0
            yield e


def _reference_apply(spec, x):
    # direct matrix formula, independent of the vectorized construction
    h = spec.hamiltonian
    out = -1j * (h @ x - x @ h)
    for a in spec.jumps:
        k = dagger(a) @ a
        out = out + a @ x @ dagger(a) - 0.5 * (k @ x + x @ k)
    return out


@given(seeds, st.integers(1, 4), st.integers(0, 3))
def test_generator_matches_matrix_formula(seed, d, n):
    spec = _spec(seed, d, n)
    l = build_generator(spec)
    x = np.random.default_rng(seed).normal(size=(d, d)) + 0j
    assert np.allclose(l.apply(x), _reference_apply(spec, x), atol=1e-12)


@given(seeds, st.integers(1, 4))
def test_trace_annihilation_on_full_basis(seed, d):
    l = build_generator(_spec(seed, d))
    for e in _full_basis(d):
        assert abs(np.trace(l.apply(e))) <= 1e-12


@given(seeds, st.integers(1, 4))
def test_hermiticity_preservation_on_full_basis(seed, d):
    l = build_generator(_spec(seed, d))
    for e in _full_basis(d):
        for x in (e + e.conj().T, 1j * (e - e.conj().T)):
            y = l.apply(x)
            assert np.abs(y - dagger(y)).max() <= 1e-12


@given(seeds, st.integers(1, 4))
def test_dual_pairing(seed, d):
    spec = _spec(seed, d)
    rng = np.random.default_rng(seed)
    rho = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    l, ld = build_generator(spec), build_dual(spec)
    lhs = np.trace(l.apply(rho) @ x)
    rhs = np.trace(rho @ ld.apply(x))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
    assert np.allclose(dual_matrix(l).matrix, ld.matrix, atol=1e-12)


def test_dual_is_unital(rng):
    spec = _spec(7, 3)
    assert np.allclose(build_dual(spec).apply(np.eye(3)), 0, atol=1e-12)


def test_swap_matrix_transposes(rng):
    x = rng.normal(size=(3, 3))
    assert np.allclose(swap_matrix(3) @ vectorize(x), vectorize(x.T))


@pytest.mark.parametrize("d,n", [(1, 0), (2, 1), (3, 2), (4, 3), (5, 2)])
def test_backend_parity(d, n):
    spec = _spec(d * 10 + n, d, n)
    compiled = _backend.kernels.lindblad_superop(spec.hamiltonian, spec.jump_array())
    fallback = _backend.python_kernels.lindblad_superop(spec.hamiltonian, spec.jump_array())
    assert np.allclose(compiled, fallback, atol=1e-13)


@given(seeds, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_semigroup_law(seed, t, s):
    l = build_generator(_spec(seed, 3))
    rho = random_density(3, np.random.default_rng(seed))
    two_step = evolve(l, evolve(l, rho, s), t)
    assert np.abs(two_step - evolve(l, rho, t + s)).max() <= 1e-9


def test_evolution_stays_a_density(rng):
    l = build_generator(_spec(3, 3))
    rho = random_density(3, rng)
    for r in evolve(l, rho, [0.0, 0.5, 2.0, 10.0]):
        assert is_density(r, 1e-10)
    assert np.allclose(evolve(l, rho, 0.0), rho)


def test_propagator_rejects_negative_time():
    with pytest.raises(ValidationError):
        propagator(build_generator(_spec(0, 2)), -1.0)


def test_spec_validation():
    with pytest.raises(ValidationError):
        LindbladSpec(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        LindbladSpec(np.eye(2), (np.eye(3),))
    spec = LindbladSpec(np.eye(2))
    with pytest.raises(ValueError):
        spec.hamiltonian[0, 0] = 5.0


def test_superop_shape_and_kind_checked():
    with pytest.raises(ValidationError):
        Superop(2, np.eye(3))
    with pytest.raises(ValidationError):
        Superop(2, np.eye(4), "bogus")


def test_combine_and_compose():
    a = build_generator(_spec(1, 2))
    b = build_generator(_spec(2, 2))
    c = combine(a, b, 0.25)
    assert np.allclose(c.matrix, a.matrix + 0.25 * b.matrix)
    x = np.array([[0.3, 0.1j], [-0.1j, 0.7]])
    assert np.allclose(a.compose(b).apply(x), a.apply(b.apply(x)))
    with pytest.raises(ValidationError):
        combine(a, build_generator(_spec(2, 3)), 1.0)


def test_projector_jumps_give_replacement_channel():
    psi = np.array([1.0, 1j, 0.5]) / np.linalg.norm([1.0, 1j, 0.5])
    jumps = tuple(np.outer(psi, np.eye(3)[a]) for a in range(3))
    l = build_generator(LindbladSpec(np.zeros((3, 3)), jumps))
    x = np.random.default_rng(0).normal(size=(3, 3)) + 0j
    assert np.allclose(l.apply(x), np.trace(x) * np.outer(psi, psi.conj()) - x)
    assert np.allclose(devectorize(l.matrix @ vectorize(x)), l.apply(x))
