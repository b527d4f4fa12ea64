"""Doubled one-particle phase space, covariance maps and one-particle modular data.

Each time bin carries the doubled space C^d ⊕ C^d.  Bin ``j`` (0-based here)
occupies coordinates ``j*2d .. (j+1)*2d - 1`` of the full vector, the first
``d`` of them for the direct part and the next ``d`` for the conjugate part.

A quasifree state is fixed by a block-diagonal covariance map ``Σ`` whose
characteristic function is ``exp(-½‖Σ ι(f)‖²)`` with ``ι(f) = (f, -conj f)``
per bin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import (
    ConjLinearMap,
    hermitian_function,
    hermitian_sqrt,
    intersection_dim,
    orthonormal_real_basis,
    real_complement,
    subspace_distance,
    to_real,
)

__all__ = [
    "PhaseSpaceModel",
    "SigmaMap",
    "RealSubspace",
    "ModularOneParticle",
    "GenericPosition",
    "SymplecticReport",
    "iota",
    "sum_flip",
    "k_pi",
    "sigma_form",
    "build_sigma_gauge",
    "build_sigma_squeezed",
    "build_sigma_custom",
    "build_sigma_prime",
    "check_symplectic",
    "check_duality",
    "subspace_H1",
    "symplectic_complement",
    "generic_position",
    "s_omega",
    "polar_conjlinear",
    "gauge_modular_closed_form",
    "apply_conj_to_subspace",
    "complex_span_dim_iota",
]

TOL_HERMITIAN = 1e-10


@dataclass(frozen=True)
class PhaseSpaceModel:
    """Bin layout of the doubled phase space.

    Attributes
    ----------
    d : int
        Noise multiplicity.
    m : int
        Number of time bins.
    """

    d: int
    m: int = 1

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be positive")

    @property
    def n(self) -> int:
        return 2 * self.d

    @property
    def D(self) -> int:
        return self.m * self.n

    def bin_slice(self, j: int) -> slice:
        """Coordinates of bin ``j`` (0-based) in the full doubled vector."""
        return slice(j * self.n, (j + 1) * self.n)

    def conj(self, v):
        return np.conj(v)

    def random_function(self, rng, scale=1.0) -> np.ndarray:
        """Random step function in C^{m·d}."""
        z = rng.normal(size=self.m * self.d) + 1j * rng.normal(size=self.m * self.d)
        return scale * z


def iota(f) -> np.ndarray:
    """Doubling map ``f -> (f, -conj f)``, applied bin by bin.

    ``f`` may be a single ``d``-vector or a 2-D array of shape ``(m, d)``;
    the result is flat, of length ``2 * f.size``.

    Examples
    --------
    >>> iota(np.array([1j]))
    array([0.+1.j, 0.+1.j])
    """
    f = np.asarray(f, dtype=complex)
    f2 = f.reshape(-1, f.shape[-1]) if f.ndim > 1 else f.reshape(1, -1)
    return np.concatenate([f2, -np.conj(f2)], axis=1).reshape(-1)


def _iota_bins(f, d: int) -> np.ndarray:
    return iota(np.asarray(f, dtype=complex).reshape(-1, d))


def sum_flip(d: int, m: int = 1) -> np.ndarray:
    """Matrix of the per-bin flip exchanging the two halves of C^d ⊕ C^d."""
    blk = np.block([[np.zeros((d, d)), np.eye(d)], [np.eye(d), np.zeros((d, d))]])
    return scipy.linalg.block_diag(*([blk] * m)).astype(complex)


def k_pi(d: int, m: int = 1) -> ConjLinearMap:
    """Flipped conjugation ``v -> Π conj(v)``."""
    return ConjLinearMap(sum_flip(d, m))


def sigma_form(u, v) -> float:
    """Symplectic form ``Im⟨u, v⟩``."""
    return float(np.vdot(u, v).imag)


@dataclass(frozen=True, eq=False)
class SigmaMap:
    """Block-diagonal covariance map, one ``2d × 2d`` block per bin."""

    blocks: np.ndarray
    kind: str = "custom"
    singular_bins: tuple = field(default=())

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim == 2:
            b = b[None]
        if b.ndim != 3 or b.shape[1] != b.shape[2] or b.shape[1] % 2:
            raise ValueError(f"blocks must have shape (m, 2d, 2d), got {b.shape}")
        object.__setattr__(self, "blocks", b)

    @property
    def m(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[1] // 2

    @property
    def model(self) -> PhaseSpaceModel:
        return PhaseSpaceModel(self.d, self.m)

    @property
    def is_singular(self) -> bool:
        return bool(self.singular_bins)

    def full(self) -> np.ndarray:
        return scipy.linalg.block_diag(*self.blocks)

    def apply(self, v) -> np.ndarray:
        """Apply Σ to a full doubled vector (or to the rows of a stack)."""
        v = np.asarray(v, dtype=complex)
        shp = v.shape
        vb = v.reshape(-1, self.m, 2 * self.d)
        out = np.einsum("jab,kjb->kja", self.blocks, vb)
        return out.reshape(shp)

    def apply_iota(self, f) -> np.ndarray:
        """``Σ ι(f)`` for a step function ``f`` in C^{m·d}."""
        return self.apply(_iota_bins(f, self.d))

    def char_norm2(self, f) -> float:
        """``‖Σ ι(f)‖²``, the exponent of the characteristic function."""
        u = self.apply_iota(f)
        return float(np.vdot(u, u).real)

    def inverse_blocks(self) -> np.ndarray:
        if self.is_singular:
            raise np.linalg.LinAlgError(f"Σ is singular in bins {list(self.singular_bins)}")
        return np.linalg.inv(self.blocks)

    def scaled(self, c: float) -> "SigmaMap":
        return SigmaMap(c * self.blocks, "custom", self.singular_bins)

    def truncated(self, upto: int) -> "SigmaMap":
        return SigmaMap(self.blocks[:upto], self.kind, tuple(b for b in self.singular_bins if b < upto))


def _per_bin(x, m: int | None, d: int | None = None, name: str = "T") -> list[np.ndarray]:
    """Normalise a scalar / matrix / per-bin list into ``m`` square matrices."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        mats = [arr.reshape(1, 1)]
    elif arr.ndim == 1:
        # a list of per-bin scalars
        mats = [np.array([[a]]) for a in arr]
    elif arr.ndim == 2:
        mats = [arr]
    elif arr.ndim == 3:
        mats = list(arr)
    else:
        raise ValueError(f"{name} has unsupported shape {arr.shape}")
    if d is not None and mats[0].shape == (1, 1) and d > 1:
        mats = [a[0, 0] * np.eye(d) for a in mats]
    if m is not None:
        if len(mats) == 1:
            mats = mats * m
        elif len(mats) != m:
            raise ValueError(f"{name} given for {len(mats)} bins, expected {m}")
    for a in mats:
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"{name} must be square, got {a.shape}")
    return mats


def _validate_T(Ts, strict: bool) -> tuple:
    singular = []
    for j, T in enumerate(Ts):
        if not np.allclose(T, T.conj().T, atol=TOL_HERMITIAN):
            raise ValueError(f"T not Hermitian in bin {j + 1}")
        w = np.linalg.eigvalsh(0.5 * (T + T.conj().T))
        if w.min() < -TOL_HERMITIAN:
            raise ValueError(f"T not positive in bin {j + 1}: min eigenvalue {w.min():.3g}")
        if w.min() <= TOL_HERMITIAN:
            if strict:
                raise ValueError(f"T not injective in bin {j + 1}: min eigenvalue {w.min():.3g}")
            singular.append(j)
    return tuple(singular)


def _gauge_block(T: np.ndarray) -> np.ndarray:
    d = T.shape[0]
    top = hermitian_sqrt(np.eye(d) + T)
    bottom = np.conj(hermitian_sqrt(T))
    z = np.zeros((d, d))
    return np.block([[top, z], [z, bottom]])


def build_sigma_gauge(T, m: int | None = None, strict: bool = True) -> SigmaMap:
    """Gauge-invariant covariance ``Σ_T = diag(√(I+T), K√T K)`` per bin.

    Parameters
    ----------
    T : scalar, (d, d) array, sequence of per-bin scalars, or (m, d, d) array
        Positive Hermitian density operator(s).
    m : int, optional
        Number of bins; a single ``T`` is repeated.
    strict : bool
        Reject ``T`` with a zero eigenvalue (the duality needs injectivity).
        With ``strict=False`` such bins are flagged in ``singular_bins``.
    """
    Ts = _per_bin(T, m)
    singular = _validate_T(Ts, strict)
    blocks = np.stack([_gauge_block(t) for t in Ts])
    return SigmaMap(blocks, "gauge", singular)


def _check_squeeze_params(U, Kp, P):
    d = U.shape[0]
    if not np.allclose(U.conj().T @ U, np.eye(d), atol=TOL_HERMITIAN):
        raise ValueError("squeeze condition failed: U is not unitary")
    if not np.allclose(Kp, Kp.T, atol=TOL_HERMITIAN):
        raise ValueError("squeeze condition failed: Kp is not symmetric (not a conjugation)")
    if not np.allclose(Kp.conj().T @ Kp, np.eye(d), atol=TOL_HERMITIAN):
        raise ValueError("squeeze condition failed: Kp is not unitary (not a conjugation)")
    if not np.allclose(P, P.conj().T, atol=TOL_HERMITIAN):
        raise ValueError("squeeze condition failed: P is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (P + P.conj().T)).min() < -TOL_HERMITIAN:
        raise ValueError("squeeze condition failed: P is not positive")
    # the conjugation v -> Kp conj(v) must commute with P (hence with its spectral projectors)
    if not np.allclose(Kp @ np.conj(P), P @ Kp, atol=TOL_HERMITIAN):
        raise ValueError("squeeze condition failed: Kp does not commute with the spectral projectors of P")


def build_sigma_squeezed(T, U=None, Kp=None, P=None, m: int | None = None, strict: bool = True) -> SigmaMap:
    """Squeezed covariance ``Σ_T (U ⊕ KUK′) [[cosh P, sinh P],[sinh P, cosh P]] (I ⊕ K′K)``.

    ``Kp`` is the kernel of the conjugation ``K′ v = Kp conj(v)``; the
    defaults ``U = I``, ``Kp = I`` and ``P = 0`` give back the gauge map.
    """
    Ts = _per_bin(T, m)
    mm = len(Ts)
    d = Ts[0].shape[0]
    Us = _per_bin(np.eye(d) if U is None else U, mm, d, "U")
    Kps = _per_bin(np.eye(d) if Kp is None else Kp, mm, d, "Kp")
    Ps = _per_bin(np.zeros((d, d)) if P is None else P, mm, d, "P")
    singular = _validate_T(Ts, strict)
    blocks = []
    for t, u, kp, p in zip(Ts, Us, Kps, Ps):
        if not (u.shape == kp.shape == p.shape == t.shape):
            raise ValueError("T, U, Kp, P must share the same d")
        _check_squeeze_params(u, kp, p)
        ch = hermitian_function(p, np.cosh)
        sh = hermitian_function(p, np.sinh)
        z = np.zeros((d, d))
        rot = np.block([[u, z], [z, np.conj(u @ kp)]])
        hyp = np.block([[ch, sh], [sh, ch]])
        fix = np.block([[np.eye(d), z], [z, kp]])
        blocks.append(_gauge_block(t) @ rot @ hyp @ fix)
    return SigmaMap(np.stack(blocks), "squeezed", singular)


def build_sigma_custom(blocks) -> SigmaMap:
    """Covariance map from explicit per-bin blocks."""
    b = np.asarray(blocks, dtype=complex)
    if b.ndim == 2:
        b = b[None]
    singular = tuple(j for j in range(b.shape[0]) if np.linalg.matrix_rank(b[j]) < b.shape[1])
    return SigmaMap(b, "custom", singular)


def _block_diagonal_parts(A: np.ndarray, m: int, n: int) -> np.ndarray:
    blocks = np.stack([A[j * n:(j + 1) * n, j * n:(j + 1) * n] for j in range(m)])
    rest = A - scipy.linalg.block_diag(*blocks)
    if np.max(np.abs(rest), initial=0.0) > 1e-9:
        raise ValueError("map is not block-diagonal over bins")
    return blocks


def build_sigma_prime(sigma: SigmaMap, j: ConjLinearMap) -> SigmaMap:
    """Commutant covariance ``Σ′ = j ∘ Σ ∘ (K ⊕ K)`` (a linear map)."""
    D = sigma.m * 2 * sigma.d
    if j.shape != (D, D):
        raise ValueError(f"j has shape {j.shape}, expected {(D, D)}")
    # j∘Σ is conj-linear with kernel A_j conj(Σ); composing with K (kernel I) gives a linear map
    lin = j @ sigma.full() @ ConjLinearMap(np.eye(D))
    return SigmaMap(_block_diagonal_parts(lin, sigma.m, 2 * sigma.d), sigma.kind)


@dataclass(frozen=True)
class SymplecticReport:
    max_deviation: float
    tolerance: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _random_pairs(rng, size, trials):
    f = rng.normal(size=(trials, size)) + 1j * rng.normal(size=(trials, size))
    g = rng.normal(size=(trials, size)) + 1j * rng.normal(size=(trials, size))
    return f, g


def check_symplectic(sigma: SigmaMap, trials: int = 1000, seed=0, tol: float = 1e-11) -> SymplecticReport:
    """Max over random ``f, g`` of ``|Im⟨Σι(f), Σι(g)⟩ - Im⟨f, g⟩|``."""
    rng = np.random.default_rng(seed)
    f, g = _random_pairs(rng, sigma.m * sigma.d, trials)
    sf = sigma.apply(np.stack([_iota_bins(x, sigma.d) for x in f]))
    sg = sigma.apply(np.stack([_iota_bins(x, sigma.d) for x in g]))
    lhs = np.einsum("ka,ka->k", sf.conj(), sg).imag
    rhs = np.einsum("ka,ka->k", f.conj(), g).imag
    return SymplecticReport(float(np.max(np.abs(lhs - rhs))), tol, trials)


def check_duality(sigma: SigmaMap, sigma_prime: SigmaMap, trials: int = 1000, seed=0, tol: float = 1e-11) -> SymplecticReport:
    """Max over random ``f, g`` of ``|Im⟨Σι(f), Σ′ι(conj g)⟩|``."""
    rng = np.random.default_rng(seed)
    f, g = _random_pairs(rng, sigma.m * sigma.d, trials)
    sf = sigma.apply(np.stack([_iota_bins(x, sigma.d) for x in f]))
    sg = sigma_prime.apply(np.stack([_iota_bins(np.conj(x), sigma.d) for x in g]))
    val = np.einsum("ka,ka->k", sf.conj(), sg).imag
    return SymplecticReport(float(np.max(np.abs(val))), tol, trials)


@dataclass(frozen=True, eq=False)
class RealSubspace:
    """Real subspace of C^N, stored as an orthonormal basis of (Re, Im)-stacked vectors."""

    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient(self) -> int:
        return self.basis.shape[0] // 2

    @classmethod
    def span(cls, complex_vectors) -> "RealSubspace":
        """Real span of the given complex vectors (columns)."""
        cols = to_real(np.asarray(complex_vectors, dtype=complex))
        return cls(orthonormal_real_basis(cols))

    def orthogonal(self) -> "RealSubspace":
        """Complement with respect to ``Re⟨·,·⟩``."""
        return RealSubspace(real_complement(self.basis))

    def times_i(self) -> "RealSubspace":
        n = self.ambient
        re, im = self.basis[:n], self.basis[n:]
        return RealSubspace(np.concatenate([-im, re], axis=0))

    def complex_vectors(self) -> np.ndarray:
        n = self.ambient
        return self.basis[:n] + 1j * self.basis[n:]

    def distance(self, other: "RealSubspace") -> float:
        if self.dim != other.dim:
            return float("inf")
        return subspace_distance(self.basis, other.basis)


def subspace_H1(sigma: SigmaMap) -> RealSubspace:
    """Real span of ``Σι(e_α)`` and ``Σι(i e_α)`` over the standard basis of C^{m·d}."""
    size = sigma.m * sigma.d
    eye = np.eye(size)
    cols = [sigma.apply_iota(e) for e in eye] + [sigma.apply_iota(1j * e) for e in eye]
    return RealSubspace.span(np.stack(cols, axis=1))


def symplectic_complement(H: RealSubspace) -> RealSubspace:
    """``{v : Im⟨h, v⟩ = 0 for all h in H}``, computed as ``(iH)^{Re⊥}``."""
    return H.times_i().orthogonal()


@dataclass(frozen=True)
class GenericPosition:
    """Real dimensions of H₁∩H₂, H₁^⊥∩H₂, H₁∩H₂^⊥, H₁^⊥∩H₂^⊥."""

    dims: tuple

    @property
    def generic(self) -> bool:
        return all(k == 0 for k in self.dims)


def generic_position(H1: RealSubspace, H2: RealSubspace) -> GenericPosition:
    H1p, H2p = H1.orthogonal(), H2.orthogonal()
    dims = (
        intersection_dim(H1.basis, H2.basis),
        intersection_dim(H1p.basis, H2.basis),
        intersection_dim(H1.basis, H2p.basis),
        intersection_dim(H1p.basis, H2p.basis),
    )
    return GenericPosition(dims)


def apply_conj_to_subspace(T: ConjLinearMap, H: RealSubspace) -> RealSubspace:
    """Image of a real subspace under a conjugate-linear map."""
    return RealSubspace.span(T(H.complex_vectors()))


def s_omega(sigma: SigmaMap) -> ConjLinearMap:
    """One-particle Tomita map ``s = Σ K^π Σ^{-1}`` on the full doubled space."""
    inv = scipy.linalg.block_diag(*sigma.inverse_blocks())
    Kpi = k_pi(sigma.d, sigma.m)
    return sigma.full() @ Kpi @ inv


@dataclass(frozen=True, eq=False)
class ModularOneParticle:
    """Polar data ``s = j ∘ δ^{1/2}``; ``j`` antiunitary, ``δ^{1/2}`` positive."""

    s: ConjLinearMap
    j: ConjLinearMap
    delta_half: np.ndarray

    @property
    def delta(self) -> np.ndarray:
        return self.delta_half @ self.delta_half


def polar_conjlinear(s: ConjLinearMap, tol: float = 1e-12) -> ModularOneParticle:
    """Polar decomposition of an invertible conjugate-linear map.

    ``δ = s* s`` has kernel ``Aᵀ conj(A)``.  Since ``j ∘ δ^{1/2}`` has kernel
    ``A_j conj(δ^{1/2})``, the antiunitary part is ``A_j = A conj(δ^{-1/2})``.
    """
    A = s.kernel
    delta = A.T @ np.conj(A)
    delta = 0.5 * (delta + delta.conj().T)
    w, v = np.linalg.eigh(delta)
    if w.min() <= tol:
        raise np.linalg.LinAlgError(f"s*s is not positive definite (min eigenvalue {w.min():.3g})")
    half = (v * np.sqrt(w)) @ v.conj().T
    inv_half = (v / np.sqrt(w)) @ v.conj().T
    j = ConjLinearMap(A @ np.conj(inv_half))
    return ModularOneParticle(s, j, half)


def gauge_modular_closed_form(T, m: int | None = None) -> ModularOneParticle:
    """Closed-form gauge data: ``j = K^π`` and ``δ^{1/2} = diag((I+T^{-1})^{-1/2}, K(I+T^{-1})^{1/2}K)``."""
    Ts = _per_bin(T, m)
    _validate_T(Ts, strict=True)
    d = Ts[0].shape[0]
    halves = []
    for t in Ts:
        w, v = np.linalg.eigh(0.5 * (t + t.conj().T))
        ratio = w / (1.0 + w)  # (I + T^{-1})^{-1} = T (I+T)^{-1}
        top = (v * np.sqrt(ratio)) @ v.conj().T
        bottom = np.conj((v / np.sqrt(ratio)) @ v.conj().T)
        z = np.zeros((d, d))
        halves.append(np.block([[top, z], [z, bottom]]))
    half = scipy.linalg.block_diag(*halves)
    j = k_pi(d, len(Ts))
    return ModularOneParticle(j @ half, j, half)


def complex_span_dim_iota(d: int, m: int = 1, tol: float = 1e-9) -> int:
    """Complex dimension of the span of ``ι(e_α)``, ``ι(i e_α)``."""
    eye = np.eye(m * d)
    cols = [_iota_bins(e, d) for e in eye] + [_iota_bins(1j * e, d) for e in eye]
    return int(np.linalg.matrix_rank(np.stack(cols, axis=1), tol=tol))
