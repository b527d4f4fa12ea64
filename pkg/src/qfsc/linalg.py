"""Small dense linear-algebra toolkit shared by the other modules.

Conjugate-linear maps are stored through a kernel matrix ``A`` acting as
``v -> A @ conj(v)`` in the standard basis, whose entrywise conjugation is
the reference conjugation everywhere in the package.  Inner products are
linear in the second argument (``np.vdot`` convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConjLinearMap",
    "compose",
    "adjoint",
    "as_matrix",
    "hermitian_function",
    "hermitian_sqrt",
    "is_hermitian",
    "is_unitary",
    "to_real",
    "from_real",
    "orthonormal_real_basis",
    "real_complement",
    "intersection_dim",
    "subspace_distance",
]

RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ConjLinearMap:
    """Conjugate-linear operator ``v -> kernel @ conj(v)``.

    Composition with plain ndarrays (linear maps) follows the usual rules:
    conj-linear after conj-linear is linear, anything else mixed stays
    conjugate-linear.  Use ``@`` for composition and call the object to apply
    it to vectors (or to the columns of a 2-D array).
    """

    kernel: np.ndarray

    __array_ufunc__ = None  # let ndarray @ ConjLinearMap defer to __rmatmul__

    def __post_init__(self):
        object.__setattr__(self, "kernel", np.asarray(self.kernel, dtype=complex))

    @property
    def shape(self):
        return self.kernel.shape

    def __call__(self, v):
        return self.kernel @ np.conj(v)

    def adjoint(self) -> "ConjLinearMap":
        # <T* x, u> = <T u, x>
        return ConjLinearMap(self.kernel.T)

    def __matmul__(self, other):
        if isinstance(other, ConjLinearMap):
            return self.kernel @ np.conj(other.kernel)
        return ConjLinearMap(self.kernel @ np.conj(np.asarray(other)))

    def __rmatmul__(self, other):
        return ConjLinearMap(np.asarray(other) @ self.kernel)

    def __neg__(self):
        return ConjLinearMap(-self.kernel)

    def __repr__(self):
        return f"ConjLinearMap(shape={self.kernel.shape})"


def compose(*maps):
    """Compose linear (ndarray) and conjugate-linear maps, rightmost first."""
    out = maps[0]
    for m in maps[1:]:
        out = out @ m
    return out


def adjoint(op):
    if isinstance(op, ConjLinearMap):
        return op.adjoint()
    return np.conj(np.asarray(op)).T


def as_matrix(op) -> np.ndarray:
    """Kernel of a conjugate-linear map, or the matrix itself."""
    if isinstance(op, ConjLinearMap):
        return op.kernel
    return np.asarray(op)


def is_hermitian(a, tol=1e-10) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=tol)


def is_unitary(a, tol=1e-10) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return np.allclose(a.conj().T @ a, np.eye(a.shape[0]), atol=tol)


def hermitian_function(a, func, tol=1e-12):
    """Spectral calculus ``func(a)`` for a Hermitian matrix ``a``."""
    a = np.asarray(a, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    w = np.where(np.abs(w) < tol, 0.0, w)
    return (v * func(w)) @ v.conj().T


def hermitian_sqrt(a):
    """Principal square root of a positive semidefinite Hermitian matrix."""
    return hermitian_function(a, lambda w: np.sqrt(np.clip(w, 0.0, None)))


# -- real subspaces of C^n, encoded as (Re, Im)-stacked real vectors ---------


def to_real(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag], axis=0)


def from_real(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[0] // 2
    return x[:n] + 1j * x[n:]


def orthonormal_real_basis(columns, tol=RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the real span of ``columns``."""
    columns = np.asarray(columns, dtype=float)
    if columns.size == 0:
        return np.zeros((columns.shape[0], 0))
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0]))) if s.size else 0
    return u[:, :rank]


def real_complement(basis, tol=RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement in R^N."""
    basis = np.asarray(basis, dtype=float)
    n = basis.shape[0]
    if basis.shape[1] == 0:
        return np.eye(n)
    u, s, _ = np.linalg.svd(basis, full_matrices=True)
    rank = int(np.sum(s > tol))
    return u[:, rank:]


def intersection_dim(a, b, tol=RANK_TOL) -> int:
    """dim(span a ∩ span b) for orthonormal real bases, via a rank count."""
    ka, kb = a.shape[1], b.shape[1]
    if ka == 0 or kb == 0:
        return 0
    s = np.linalg.svd(np.hstack([a, b]), compute_uv=False)
    rank = int(np.sum(s > tol))
    return ka + kb - rank


def subspace_distance(a, b) -> float:
    """Operator-norm distance between the orthogonal projections onto span a, span b."""
    pa = a @ a.T
    pb = b @ b.T
    return float(np.linalg.norm(pa - pb, 2))
