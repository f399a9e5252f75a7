import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnet4 import qlinalg as ql
from conftest import random_density, random_vector

dims_strategy = st.lists(st.integers(2, 3), min_size=2, max_size=4)


def test_partial_trace_of_product_returns_factor(rng):
    a, b, c = random_density(2, rng), random_density(3, rng), random_density(2, rng)
    rho = ql.tensor_all([a, b, c])
    assert np.allclose(ql.partial_trace(rho, (2, 3, 2), [1]), b)
    assert np.allclose(ql.partial_trace(rho, (2, 3, 2), [0, 2]), np.kron(a, c))
    assert np.allclose(ql.partial_trace(rho, (2, 3, 2), [2, 0]), np.kron(a, c))


def test_partial_trace_matches_explicit_sum(rng):
    rho = random_density(6, rng)
    t = rho.reshape(2, 3, 2, 3)
    assert np.allclose(ql.partial_trace(rho, (2, 3), [0]), np.einsum("ajbj->ab", t))
    assert np.allclose(ql.partial_trace(rho, (2, 3), [1]), np.einsum("jajb->ab", t))


@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1), data=st.data())
def test_partial_trace_preserves_trace_and_hermiticity(dims, seed, data):
    rng = np.random.default_rng(seed)
    rho = random_density(int(np.prod(dims)), rng)
    keep = data.draw(st.sets(st.integers(0, len(dims) - 1), min_size=1))
    red = ql.partial_trace(rho, dims, sorted(keep))
    assert np.isclose(np.trace(red).real, 1)
    assert ql.is_hermitian(red)


@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1), data=st.data())
def test_pure_marginal_spectrum_matches_dense(dims, seed, data):
    rng = np.random.default_rng(seed)
    psi = random_vector(int(np.prod(dims)), rng)
    keep = sorted(data.draw(st.sets(st.integers(0, len(dims) - 1), min_size=1)))
    dense = ql.partial_trace(np.outer(psi, psi.conj()), dims, keep)
    assert np.allclose(ql.reduced_from_pure(psi, dims, keep), dense)
    assert np.allclose(ql.pure_marginal_spectrum(psi, dims, keep), ql.hermitian_spectrum(dense), atol=1e-12)


def test_partial_transpose_of_bell_state_has_negative_eigenvalue():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    pt = ql.partial_transpose(np.outer(psi, psi), (2, 2), [1])
    assert np.allclose(sorted(np.linalg.eigvalsh(pt)), [-0.5, 0.5, 0.5, 0.5])
    assert np.isclose(ql.trace_norm(pt), 2.0)


def test_partial_transpose_full_flip_is_transpose(rng):
    rho = random_density(6, rng)
    assert np.allclose(ql.partial_transpose(rho, (2, 3), [0, 1]), rho.T)
    assert np.allclose(ql.partial_transpose(rho, (2, 3), []), rho)


def test_numerical_rank_uses_relative_threshold():
    assert ql.numerical_rank(np.array([1.0, 1e-3, 1e-9])) == 2
    assert ql.numerical_rank(np.array([1e-6, 1e-7, 1e-16])) == 2
    assert ql.numerical_rank(np.zeros(3)) == 0


def test_hermitian_spectrum_is_descending_and_rejects_nonhermitian(rng):
    s = ql.hermitian_spectrum(random_density(4, rng))
    assert np.all(np.diff(s) <= 0)
    with pytest.raises(ValueError):
        ql.hermitian_spectrum(np.array([[0, 1], [0, 0]], dtype=complex))


def test_apply_on_axes_matches_kron(rng):
    psi = random_vector(12, rng)
    u = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    t = ql.apply_on_axes(psi.reshape(2, 3, 2), u, [1]).reshape(-1)
    assert np.allclose(t, np.kron(np.kron(np.eye(2), u), np.eye(2)) @ psi)


def test_dimension_caps():
    with pytest.raises(ql.DimensionCapError):
        ql.check_vector_dim(2**18 + 1)
    with pytest.raises(ql.DimensionCapError):
        ql.check_matrix_dim(4097)
    with pytest.raises(ql.DimensionCapError):
        ql.tensor(np.eye(64), np.eye(128))
    ql.check_matrix_dim(4096)


def test_partial_trace_rejects_bad_layout(rng):
    with pytest.raises(ValueError):
        ql.partial_trace(random_density(6, rng), (2, 2), [0])
