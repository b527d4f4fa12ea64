import numpy as np
import pytest

from qfsc.adapted import AdaptedProcess, AdaptedSpace, VectorMartingale
from qfsc.phase_space import build_sigma_custom, build_sigma_gauge, build_sigma_squeezed, k_pi, s_omega

from conftest import crandn


@pytest.fixture
def space():
    return AdaptedSpace(1, 3, 5)


def test_layout():
    A = AdaptedSpace(2, 3, 2)
    assert A.grid.n == 4 and A.grid.modes == 12
    assert A.grid.bin_modes(1) == slice(4, 8)


def test_first_bin_integral_is_creation_on_vacuum():
    # z_1 = c ⊗ Ω gives a†(c) Ω, a one-particle vector carried by bin 1
    A = AdaptedSpace(1, 2, 3)
    c = np.array([1.0 + 1j, -2.0])
    z = A.zero_process()
    z.values[0, :, 0] = c
    x = A.ito(z)
    one = A.fock.index_of([[1, 0, 0, 0], [0, 1, 0, 0]])
    np.testing.assert_allclose(x[one], c)
    assert np.linalg.norm(x) == pytest.approx(np.linalg.norm(c))


def test_second_bin_integrand_legs_in_first_bin():
    A = AdaptedSpace(1, 2, 3)
    z = A.zero_process()
    leg = A.fock.creation([1.0, 0, 0, 0])(A.fock.vacuum())
    z.values[1, 0] = leg
    x = A.ito(z)
    # a†_{2,1} a†_{1,1} Ω
    k = A.fock.index_of([[1, 0, 1, 0]])[0]
    assert x[k] == pytest.approx(1.0)
    assert np.linalg.norm(x) == pytest.approx(1.0)


def test_non_adapted_input_rejected(space):
    z = space.zero_process()
    # a particle in the current bin is not in the past
    idx = space.fock.index_of([[1, 0, 0, 0, 0, 0]])[0]
    z.values[0, 0, idx] = 1.0
    assert not space.is_adapted(z)
    with pytest.raises(ValueError, match="not adapted"):
        space.ito(z)
    assert space.is_adapted(space.project_adapted(z))


def test_ito_isometry_exact(space, rng):
    for _ in range(5):
        z = space.random_adapted(rng)
        assert np.linalg.norm(space.ito(z)) ** 2 == pytest.approx(z.norm() ** 2, rel=1e-12)


def test_sigma_integral_with_identity_is_plain_integral(space, rng):
    ident = build_sigma_custom(np.stack([np.eye(2)] * 3))
    z = space.random_adapted(rng)
    np.testing.assert_allclose(space.ito_sigma(z, ident), space.ito(z), atol=1e-12)


def test_sigma_isometry(space, rng):
    sig = build_sigma_squeezed(1.0, P=0.3, m=3)
    z = space.random_adapted(rng)
    for t in range(4):
        lhs = np.linalg.norm(space.ito_sigma(z, sig, t)) ** 2
        rhs = sum(np.linalg.norm(sig.blocks[j] @ z.values[j]) ** 2 for j in range(t))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_sigma_integral_injective():
    A = AdaptedSpace(1, 2, 3)
    M = A.ito_sigma_matrix(build_sigma_gauge(1.0, m=2))
    assert np.linalg.matrix_rank(M) == M.shape[1]


def test_gradient_is_adjoint_and_inverts(space, rng):
    z = space.random_adapted(rng)
    x = crandn(rng, space.dim)
    lhs = np.vdot(space.ito(z), x)
    rhs = np.sum(np.conj(z.values) * space.adapted_gradient(x).values)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    np.testing.assert_allclose(space.adapted_gradient(space.ito(z)).values, z.values, atol=1e-12)


def test_conditional_expectations_are_nested(space, rng):
    x = crandn(rng, space.dim)
    for j in range(4):
        for k in range(4):
            np.testing.assert_array_equal(space.project_Pt(j, space.project_Pt(k, x)),
                                          space.project_Pt(min(j, k), x))
    assert space.project_Pt(0, x)[0] == x[0]
    assert np.count_nonzero(space.project_Pt(0, x)) == 1
    with pytest.raises(IndexError):
        space.project_Pt(4, x)


def test_integrals_are_martingales(space, rng):
    sig = build_sigma_gauge(0.5, m=3)
    x = space.martingale(space.random_adapted(rng), sig, space.fock.vacuum())
    assert space.is_martingale(x)
    # a non-martingale sequence is flagged
    bad = VectorMartingale(np.stack([x[0], x[1], x[3], x[3]]))
    assert space.martingale_defect(bad) > 0.1


def test_second_quantized_flip_on_one_particle():
    # Γ(K^π) a†(c) Ω = a†(K^π c) Ω
    A = AdaptedSpace(1, 2, 3)
    kp = k_pi(1, 2)
    G = A.fock.second_quantize(kp)
    c = np.array([1 + 2j, 3.0, -1j, 0.5])
    lhs = G(A.fock.creation(c)(A.fock.vacuum()))
    rhs = A.fock.creation(kp(c))(A.fock.vacuum())
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_reconstruction_roundtrip(space, rng):
    sig = build_sigma_squeezed(2.0, P=0.2, m=3)
    z = space.random_adapted(rng)
    x = space.martingale(z, sig, crandn(rng, 1)[0] * space.fock.vacuum())
    rec = space.reconstruct_integrand(x, sig)
    np.testing.assert_allclose(rec.z.values, z.values, atol=1e-10)
    assert rec.max_residual <= 1e-10


def test_modular_commutation_exact_with_vacuum_legs():
    A = AdaptedSpace(1, 2, 6)
    sig = build_sigma_gauge(1.0, m=2)
    rep = A.modular_ito_commutation_check(sig, s_omega(sig), trials=3, vacuum_past=True)
    assert rep.max_deviation <= 1e-12


def test_modular_commutation_truncated_legs():
    A = AdaptedSpace(1, 2, 10)
    sig = build_sigma_gauge(1.0, m=2)
    rep = A.modular_ito_commutation_check(sig, s_omega(sig), trials=2, seed=4)
    assert rep.passed and rep.max_deviation <= 1e-6


def test_tomita_on_sigma_integral_both_references(rng):
    A = AdaptedSpace(1, 2, 10)
    sig = build_sigma_squeezed(1.0, P=0.3, m=2)
    S = A.fock.modular_S(s_omega(sig))
    kp = k_pi(1, 2)
    wp = A.random_weyl_process(rng, sig, 0.4)
    z = wp.vectors(A)
    x = A.martingale(z, sig, A.fock.vacuum())
    exact = A.theoremX_b_check(x, wp, S, kp, sig)
    fock_side = A.theoremX_b_check(x, z, S, kp, sig)
    assert exact.max_deviation <= 1e-6
    # applying Γ(s) to the truncated legs is exact up to the cutoff projection
    assert fock_side.max_deviation <= 1e-6


def test_process_arithmetic(space, rng):
    z, w = space.random_adapted(rng), space.random_adapted(rng)
    np.testing.assert_allclose((z + w - w).values, z.values)
    assert z.truncated(1).bin_norms2()[1:].sum() == 0
    assert isinstance(z.truncated(2), AdaptedProcess)


def test_sigma_shape_mismatch(space, rng):
    with pytest.raises(ValueError):
        space.ito_sigma(space.random_adapted(rng), build_sigma_gauge(1.0, m=2))
