import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfsc.linalg import (
    ConjLinearMap,
    hermitian_sqrt,
    intersection_dim,
    orthonormal_real_basis,
    real_complement,
    subspace_distance,
    to_real,
    from_real,
)

from conftest import crandn


def test_conj_adjoint_defining_identity(rng):
    # <T* x, u> = <T u, x> for conjugate-linear T
    A = crandn(rng, 4, 3)
    T = ConjLinearMap(A)
    for _ in range(10):
        x, u = crandn(rng, 4), crandn(rng, 3)
        assert np.vdot(T.adjoint()(x), u) == pytest.approx(np.vdot(T(u), x), abs=1e-12)


def test_composition_rules_match_function_composition(rng):
    A, B = crandn(rng, 3, 3), crandn(rng, 3, 3)
    L = crandn(rng, 3, 3)
    T1, T2 = ConjLinearMap(A), ConjLinearMap(B)
    v = crandn(rng, 3)
    lin = T1 @ T2
    assert isinstance(lin, np.ndarray)
    np.testing.assert_allclose(lin @ v, T1(T2(v)), atol=1e-12)
    np.testing.assert_allclose((T1 @ L)(v), T1(L @ v), atol=1e-12)
    np.testing.assert_allclose((L @ T1)(v), L @ T1(v), atol=1e-12)


def test_conj_map_is_conjugate_linear(rng):
    T = ConjLinearMap(crandn(rng, 2, 2))
    v = crandn(rng, 2)
    np.testing.assert_allclose(T(1j * v), -1j * T(v), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=2**31))
def test_hermitian_sqrt_squares_back(n, seed):
    rng = np.random.default_rng(seed)
    X = crandn(rng, n, n)
    P = X @ X.conj().T
    R = hermitian_sqrt(P)
    np.testing.assert_allclose(R @ R, P, atol=1e-9 * max(1.0, np.abs(P).max()))
    np.testing.assert_allclose(R, R.conj().T, atol=1e-12)


def test_real_encoding_roundtrip(rng):
    v = crandn(rng, 5)
    np.testing.assert_array_equal(from_real(to_real(v)), v)


def test_intersection_and_complement():
    e = np.eye(4)
    a = orthonormal_real_basis(e[:, :2])
    b = orthonormal_real_basis(e[:, 1:3])
    assert intersection_dim(a, b) == 1
    c = real_complement(a)
    assert c.shape[1] == 2
    assert intersection_dim(a, c) == 0
    assert subspace_distance(a, a) == pytest.approx(0.0, abs=1e-14)
    assert subspace_distance(a, b) == pytest.approx(1.0)
