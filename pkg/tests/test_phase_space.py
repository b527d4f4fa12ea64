import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from qfsc.linalg import ConjLinearMap
from qfsc.phase_space import (
    RealSubspace,
    apply_conj_to_subspace,
    build_sigma_custom,
    build_sigma_gauge,
    build_sigma_prime,
    build_sigma_squeezed,
    check_duality,
    check_symplectic,
    complex_span_dim_iota,
    gauge_modular_closed_form,
    generic_position,
    iota,
    k_pi,
    polar_conjlinear,
    s_omega,
    subspace_H1,
    symplectic_complement,
)

from conftest import crandn

SQ2 = np.sqrt(2.0)


def test_iota_per_bin_layout():
    f = np.array([[1 + 2j, 3j], [4.0, -1j]])
    np.testing.assert_array_equal(iota(f), [1 + 2j, 3j, -1 + 2j, 3j, 4, -1j, -4, -1j])


def test_iota_complex_span_is_full():
    # ι(V) spans V ⊕ KV over C
    for d, m in [(1, 1), (1, 3), (2, 2)]:
        assert complex_span_dim_iota(d, m) == 2 * d * m


def test_gauge_T1_block_values():
    sig = build_sigma_gauge(1.0, m=1)
    np.testing.assert_allclose(sig.blocks[0], np.diag([SQ2, 1.0]), atol=1e-15)


def test_gauge_matrix_T_block():
    sig = build_sigma_gauge(np.diag([1.0, 3.0]), m=1)
    np.testing.assert_allclose(np.diag(sig.blocks[0]).real, [SQ2, 2.0, 1.0, np.sqrt(3.0)], atol=1e-14)


def test_gauge_is_symplectic_and_dual():
    sig = build_sigma_gauge(1.0, m=2)
    sp = build_sigma_prime(sig, polar_conjlinear(s_omega(sig)).j)
    assert check_symplectic(sig, 1000, 0).passed
    assert check_duality(sig, sp, 1000, 0).passed


def test_sigma_prime_gauge_closed_form():
    # Σ′_T = [[0, √T], [K√(I+T)K, 0]] per bin
    for tau in [0.3, 1.0, 2.5]:
        sig = build_sigma_gauge(tau, m=1)
        sp = build_sigma_prime(sig, polar_conjlinear(s_omega(sig)).j)
        expected = np.array([[0, np.sqrt(tau)], [np.sqrt(1 + tau), 0]])
        np.testing.assert_allclose(sp.blocks[0], expected, atol=1e-12)


def test_squeezed_against_mode_transform_oracle(rng):
    # Σ_{T,Q} ι(v) = Σ_T ι(Qv), Qv = U cosh(P) v - U Kp conj(sinh(P) v)
    d = 2
    X = crandn(rng, d, d)
    T = X @ X.conj().T + 0.5 * np.eye(d)
    U = scipy.linalg.expm(1j * (X + X.conj().T))
    Kp = np.eye(d)
    P = np.diag([0.3, 0.7])
    sq = build_sigma_squeezed(T, U=U, Kp=Kp, P=P, m=1)
    g = build_sigma_gauge(T, m=1)
    ch, sh = np.diag(np.cosh([0.3, 0.7])), np.diag(np.sinh([0.3, 0.7]))
    for _ in range(10):
        v = crandn(rng, d)
        Qv = U @ ch @ v - U @ Kp @ np.conj(sh @ v)
        np.testing.assert_allclose(sq.apply_iota(v), g.apply_iota(Qv), atol=1e-12)


def test_squeezed_sigma_prime_matches_composition():
    # Σ′_{T,Q} = Σ′_T ∘ (K ⊕ K) ∘ (U ⊕ KUK′) ∘ Γ ∘ (K ⊕ K′), with Γ the hyperbolic block
    P = 0.3
    sq = build_sigma_squeezed(1.0, P=P, m=1)
    pol = polar_conjlinear(s_omega(sq))
    sp = build_sigma_prime(sq, pol.j)
    sp_T = np.array([[0, 1.0], [SQ2, 0]])
    hyp = np.array([[np.cosh(P), np.sinh(P)], [np.sinh(P), np.cosh(P)]])
    composed = sp_T @ ConjLinearMap(np.eye(2)) @ np.eye(2) @ hyp @ ConjLinearMap(np.eye(2))
    np.testing.assert_allclose(sp.blocks[0], composed, atol=1e-12)
    # j is unchanged by squeezing with these parameters
    np.testing.assert_allclose(pol.j.kernel, k_pi(1).kernel, atol=1e-12)


@pytest.mark.parametrize("P", [0.0, 0.3])
def test_squeezed_symplectic_and_dual(P):
    sig = build_sigma_squeezed(1.0, P=P, m=2)
    sp = build_sigma_prime(sig, polar_conjlinear(s_omega(sig)).j)
    assert check_symplectic(sig, 1000, 1).max_deviation <= 1e-11
    assert check_duality(sig, sp, 1000, 1).max_deviation <= 1e-11


def test_non_symplectic_map_detected():
    # 2Σ scales Im⟨Σι f, Σι g⟩ by 4; deviation 3|Im⟨f,g⟩| for gauge T=1 is far above tolerance
    sig = build_sigma_gauge(1.0, m=1).scaled(2.0)
    rep = check_symplectic(sig, 50, 0)
    assert not rep.passed
    f, g = np.array([1.0]), np.array([1j])
    lhs = np.vdot(sig.apply_iota(f), sig.apply_iota(g)).imag
    assert lhs - np.vdot(f, g).imag == pytest.approx(3 * np.vdot(f, g).imag)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.05, max_value=20.0))
def test_polar_matches_gauge_closed_form(tau):
    sig = build_sigma_gauge(tau, m=1)
    pol = polar_conjlinear(s_omega(sig))
    expected = np.diag([np.sqrt(tau / (1 + tau)), np.sqrt((1 + tau) / tau)])
    np.testing.assert_allclose(pol.delta_half, expected, atol=1e-10)
    np.testing.assert_allclose(pol.j.kernel, [[0, 1], [1, 0]], atol=1e-10)
    cf = gauge_modular_closed_form(tau, m=1)
    np.testing.assert_allclose(cf.delta_half, expected, atol=1e-12)


def test_polar_reassembles_s(rng):
    d = 2
    X = crandn(rng, d, d)
    sig = build_sigma_squeezed(X @ X.conj().T + np.eye(d), P=np.diag([0.2, 0.4]), m=2)
    s = s_omega(sig)
    pol = polar_conjlinear(s)
    np.testing.assert_allclose((pol.j @ pol.delta_half).kernel, s.kernel, atol=1e-10)
    # j antiunitary involution, δ^{1/2} positive
    jj = pol.j @ pol.j
    np.testing.assert_allclose(jj, np.eye(jj.shape[0]), atol=1e-10)
    assert np.linalg.eigvalsh(pol.delta_half).min() > 0


def test_polar_of_plain_conjugation():
    pol = polar_conjlinear(ConjLinearMap(np.eye(3)))
    np.testing.assert_allclose(pol.delta_half, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(pol.j.kernel, np.eye(3), atol=1e-15)


def test_s_involution_and_eigenvectors(rng):
    sig = build_sigma_squeezed(1.0, P=0.3, m=2)
    s = s_omega(sig)
    ss = s @ s
    assert np.max(np.abs(ss - np.eye(4))) <= 1e-12
    f = crandn(rng, 2)
    u = sig.apply_iota(f)
    np.testing.assert_allclose(s(u), -u, atol=1e-12)
    np.testing.assert_allclose(s(1j * u), 1j * u, atol=1e-12)


def test_j_maps_H1_to_H2():
    for sig in [build_sigma_gauge(1.0, m=2), build_sigma_squeezed(2.0, P=0.3, m=2)]:
        H1 = subspace_H1(sig)
        H2 = symplectic_complement(H1)
        j = polar_conjlinear(s_omega(sig)).j
        assert apply_conj_to_subspace(j, H1).distance(H2) <= 1e-10


def test_symplectic_complement_is_involutive():
    H1 = subspace_H1(build_sigma_gauge(0.7, m=2))
    H2 = symplectic_complement(H1)
    assert symplectic_complement(H2).distance(H1) <= 1e-10


def test_generic_position_gauge_vs_fock():
    sig = build_sigma_gauge(1.0, m=1)
    H1 = subspace_H1(sig)
    assert generic_position(H1, symplectic_complement(H1)).dims == (0, 0, 0, 0)
    fock = build_sigma_gauge(0.0, m=1, strict=False)
    H1 = subspace_H1(fock)
    gp = generic_position(H1, symplectic_complement(H1))
    assert gp.dims == (0, 2, 2, 0)
    assert not gp.generic


def test_generic_position_detects_equal_subspaces():
    H = RealSubspace.span(np.array([[1.0], [0.0]]))
    assert generic_position(H, H).dims[0] == 1


def test_T_validation_messages():
    with pytest.raises(ValueError, match="T not injective in bin 2"):
        build_sigma_gauge([1.0, 0.0])
    with pytest.raises(ValueError, match="not positive"):
        build_sigma_gauge(-1.0, m=1)
    with pytest.raises(ValueError, match="not Hermitian"):
        build_sigma_gauge(np.array([[1.0, 1.0], [0.0, 1.0]]))
    sig = build_sigma_gauge([1.0, 0.0], strict=False)
    assert sig.singular_bins == (1,)
    with pytest.raises(np.linalg.LinAlgError):
        s_omega(sig)


def test_squeeze_condition_messages():
    with pytest.raises(ValueError, match="U is not unitary"):
        build_sigma_squeezed(1.0, U=2.0, m=1)
    with pytest.raises(ValueError, match="P is not positive"):
        build_sigma_squeezed(1.0, P=-0.1, m=1)
    with pytest.raises(ValueError, match="commute"):
        build_sigma_squeezed(np.eye(2), Kp=np.array([[0, 1], [1, 0]]), P=np.diag([0.1, 0.5]))


def test_custom_sigma_flags_singular_bins():
    sig = build_sigma_custom(np.stack([np.eye(2), np.diag([1.0, 0.0])]))
    assert sig.singular_bins == (1,)
