"""Truncated symmetric Fock space over a finite number of modes.

The space keeps every occupation pattern with at most ``cutoff`` particles.
Operators are compressions to that space: creation and annihilation are
exact adjoints of each other, so the truncated Weyl generator is
anti-Hermitian and its exponential is exactly unitary.  Identities that
involve the particle number beyond the cutoff hold only up to tail terms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb, factorial

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply
from scipy.stats import poisson

from .linalg import ConjLinearMap

__all__ = [
    "TruncatedFock",
    "FockOperator",
    "fock_dimension",
    "vacuum_expectation",
]


def fock_dimension(modes: int, cutoff: int) -> int:
    """Number of occupation patterns of ``modes`` modes with at most ``cutoff`` particles."""
    return comb(modes + cutoff, cutoff)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Operator on a truncated Fock space.

    Parameters
    ----------
    matrix : ndarray or scipy sparse matrix
        Matrix in the occupation basis.  For a conjugate-linear operator this
        is the kernel ``A`` of ``v -> A @ conj(v)``.
    antilinear : bool
        Linearity flag.
    """

    matrix: object
    antilinear: bool = False

    __array_ufunc__ = None

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)

    def apply(self, v):
        v = np.asarray(v)
        if self.antilinear:
            v = np.conj(v)
        return self.matrix @ v

    __call__ = apply

    def adjoint(self) -> "FockOperator":
        m = self.matrix
        if self.antilinear:
            return FockOperator(m.T, True)
        return FockOperator(m.conj().T, False)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            rhs = other.matrix
            if self.antilinear:
                rhs = rhs.conj()
            return FockOperator(self.matrix @ rhs, self.antilinear != other.antilinear)
        return self.apply(other)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        if self.antilinear != other.antilinear:
            raise ValueError("cannot add linear and conjugate-linear operators")
        return FockOperator(self.matrix + other.matrix, self.antilinear)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        return self + (-1.0) * other

    def __rmul__(self, c):
        # c * T: scalar applied after T
        return FockOperator(c * self.matrix, self.antilinear)

    def __neg__(self):
        return (-1.0) * self


class TruncatedFock:
    """Symmetric Fock space over ``modes`` modes truncated at ``cutoff`` particles.

    The occupation basis is graded by total particle number with the vacuum
    first; inside each grade patterns follow the order of
    ``itertools.combinations_with_replacement`` (descending lexicographic in
    the occupation numbers).

    Examples
    --------
    >>> F = TruncatedFock(2, 2)
    >>> F.basis.tolist()
    [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
    """

    def __init__(self, modes: int, cutoff: int):
        if modes < 1 or cutoff < 0:
            raise ValueError("need modes >= 1 and cutoff >= 0")
        self.modes = int(modes)
        self.cutoff = int(cutoff)
        if (self.cutoff + 1) ** self.modes >= 2**62:
            raise ValueError("too many modes for this cutoff")
        rows = []
        for k in range(self.cutoff + 1):
            for combo in itertools.combinations_with_replacement(range(self.modes), k):
                occ = [0] * self.modes
                for a in combo:
                    occ[a] += 1
                rows.append(occ)
        self.basis = np.array(rows, dtype=np.int64).reshape(-1, self.modes)
        self.dim = self.basis.shape[0]
        self.total = self.basis.sum(axis=1)
        self._radix = (self.cutoff + 1) ** np.arange(self.modes, dtype=np.int64)
        keys = self.basis @ self._radix
        self._order = np.argsort(keys)
        self._sorted_keys = keys[self._order]
        self._adag_cache: dict[int, sp.csr_matrix] = {}

    def __repr__(self):
        return f"TruncatedFock(modes={self.modes}, cutoff={self.cutoff}, dim={self.dim})"

    # -- indexing -----------------------------------------------------------

    def index_of(self, occupations) -> np.ndarray:
        """Basis indices of occupation rows (-1 where absent)."""
        occ = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
        keys = occ @ self._radix
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.clip(pos, 0, self.dim - 1)
        ok = (self._sorted_keys[pos] == keys) & (occ.sum(axis=1) <= self.cutoff) & (occ.min(axis=1) >= 0)
        return np.where(ok, self._order[pos], -1)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def sector_mask(self, max_particles: int) -> np.ndarray:
        return self.total <= max_particles

    def particles_in(self, modes) -> np.ndarray:
        """Particle count in the given mode selection for every basis element."""
        return self.basis[:, modes].sum(axis=1)

    # -- ladder operators ---------------------------------------------------

    def mode_creation(self, alpha: int) -> sp.csr_matrix:
        """Sparse matrix of the creation operator of mode ``alpha``."""
        if alpha not in self._adag_cache:
            src = np.nonzero(self.total < self.cutoff)[0]
            occ = self.basis[src].copy()
            vals = np.sqrt(occ[:, alpha] + 1.0)
            occ[:, alpha] += 1
            dst = self.index_of(occ)
            mat = sp.csr_matrix((vals, (dst, src)), shape=(self.dim, self.dim))
            self._adag_cache[alpha] = mat
        return self._adag_cache[alpha]

    def creation(self, u) -> FockOperator:
        """Creation operator ``a†(u) = Σ u_α a†_α`` (linear in ``u``)."""
        u = self._mode_vector(u)
        mat = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for a in np.nonzero(u)[0]:
            mat = mat + u[a] * self.mode_creation(a)
        return FockOperator(mat.tocsr())

    def annihilation(self, u) -> FockOperator:
        """Annihilation operator ``a(u) = a†(u)*`` (conjugate-linear in ``u``)."""
        return FockOperator(self.creation(u).matrix.conj().T.tocsr())

    def number_operator(self) -> FockOperator:
        return FockOperator(sp.diags(self.total.astype(complex)).tocsr())

    # -- vectors ------------------------------------------------------------

    @cached_property
    def _sqrt_factorials(self) -> np.ndarray:
        f = np.sqrt(np.array([float(factorial(k)) for k in range(self.cutoff + 1)]))
        return np.prod(f[self.basis], axis=1)

    def exp_vector(self, u) -> np.ndarray:
        """Truncated exponential vector with coefficients ``Π u_α^{n_α} / √(n_α!)``."""
        u = self._mode_vector(u)
        powers = np.prod(u[None, :] ** self.basis, axis=1)
        return powers / self._sqrt_factorials

    def coherent(self, u) -> np.ndarray:
        """Normalised exponential vector ``φ(u) = e^{-‖u‖²/2} ε(u)`` (truncated)."""
        u = self._mode_vector(u)
        return np.exp(-0.5 * np.vdot(u, u).real) * self.exp_vector(u)

    def coherent_tail_bound(self, u) -> float:
        """Norm of the part of ``φ(u)`` discarded by the cutoff (exact, via the Poisson tail)."""
        r2 = float(np.vdot(u, u).real)
        return float(np.sqrt(poisson.sf(self.cutoff, r2)))

    # -- Weyl operators -----------------------------------------------------

    def weyl_generator(self, u) -> sp.csr_matrix:
        """Anti-Hermitian generator ``a†(u) - a(u)``."""
        c = self.creation(u).matrix
        return (c - c.conj().T).tocsr()

    def weyl(self, u) -> FockOperator:
        """Dense Weyl operator ``W₀(u) = exp(a†(u) - a(u))`` on the truncated space."""
        return FockOperator(scipy.linalg.expm(self.weyl_generator(u).toarray()))

    def weyl_apply(self, u, v) -> np.ndarray:
        """``W₀(u) v`` without forming the dense exponential."""
        v = np.asarray(v, dtype=complex)
        u = self._mode_vector(u)
        if not np.any(u):
            return v.copy()
        return expm_multiply(self.weyl_generator(u), v)

    # -- second quantisation -------------------------------------------------

    def second_quantize(self, R) -> FockOperator:
        """Second quantisation ``Γ(R)`` of a linear or conjugate-linear mode map.

        Built sector by sector from ``Γ(R) a†(e_α) = a†(R e_α) Γ(R)``, which
        is exact on the truncated space because ``Γ(R)`` preserves particle
        number.
        """
        antilinear = isinstance(R, ConjLinearMap)
        A = R.kernel if antilinear else np.asarray(R, dtype=complex)
        if A.shape != (self.modes, self.modes):
            raise ValueError(f"mode map must be {self.modes}x{self.modes}, got {A.shape}")
        adag = [self.creation(A[:, a]).matrix.tocsc() for a in range(self.modes)]
        cols: list[sp.csc_matrix] = [None] * self.dim
        cols[0] = sp.csc_matrix(([1.0 + 0j], ([0], [0])), shape=(self.dim, 1))
        for i in range(1, self.dim):
            occ = self.basis[i]
            a = int(np.nonzero(occ)[0][0])
            parent = occ.copy()
            parent[a] -= 1
            p = int(self.index_of(parent)[0])
            cols[i] = (adag[a] @ cols[p]) * (1.0 / np.sqrt(occ[a]))
        mat = sp.hstack(cols, format="csr")
        mat.eliminate_zeros()
        return FockOperator(mat, antilinear)

    def modular_S(self, s: ConjLinearMap) -> FockOperator:
        """Fock-level Tomita operator ``Γ(s)`` of a one-particle ``s``."""
        if not isinstance(s, ConjLinearMap):
            raise TypeError("modular_S expects a ConjLinearMap")
        return self.second_quantize(s)

    def vacuum_projection(self) -> FockOperator:
        return FockOperator(sp.csr_matrix(([1.0 + 0j], ([0], [0])), shape=(self.dim, self.dim)))

    # -- helpers ------------------------------------------------------------

    def _mode_vector(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex).reshape(-1)
        if u.shape[0] != self.modes:
            raise ValueError(f"expected a {self.modes}-component mode vector, got {u.shape[0]}")
        return u


def vacuum_expectation(op: FockOperator) -> complex:
    """``⟨Ω, op Ω⟩``."""
    m = op.matrix
    return complex(m[0, 0])

