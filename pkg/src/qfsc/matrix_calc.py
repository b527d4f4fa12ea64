"""Matrix-algebra model of a von Neumann algebra with a cyclic separating vector.

The Hilbert space is ``C^a ⊗ C^a`` (flat index ``i*a + j``), the algebra is
``M = B(C^a) ⊗ I`` with commutant ``M′ = I ⊗ B(C^a)``, and the vector is
``ξ = Σ λ_i e_i ⊗ e_i``.  Tomita data are obtained by brute force from the
defining relation ``S(xξ) = x*ξ``.

Operators ``B : k₁ -> k₂ ⊗ H`` are stored as ``(k₂·h, k₁)`` matrices with row
index ``a*h + v``.  Conjugations on the multiplicity spaces are entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ConjLinearMap, hermitian_function

__all__ = [
    "MatrixModel",
    "ModularData",
    "OperatorMatrix",
    "BlockIntegrandMatrix",
    "brute_force_modular",
    "vector_from_op",
    "op_from_vector",
    "partial_transpose",
    "conjugate",
    "dagger",
    "dagger_from_identity",
    "column_transform",
    "block_dagger",
    "flip_conjugate_column",
]


@dataclass(frozen=True, eq=False)
class MatrixModel:
    """``M = B(C^a) ⊗ I`` acting on ``C^a ⊗ C^a`` with vector ``Σ λ_i e_i ⊗ e_i``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D array")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if not np.isclose(np.sum(w**2), 1.0, atol=1e-12):
            raise ValueError("weights must satisfy Σλ² = 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def tracial(cls, a: int) -> "MatrixModel":
        return cls(np.full(a, 1.0 / np.sqrt(a)))

    @property
    def a(self) -> int:
        return self.weights.size

    @property
    def h(self) -> int:
        return self.a * self.a

    @property
    def separating(self) -> bool:
        return bool(np.all(self.weights > 0))

    @property
    def xi(self) -> np.ndarray:
        return np.diag(self.weights).reshape(-1).astype(complex)

    def embed(self, x) -> np.ndarray:
        """``x ⊗ I`` in M."""
        return np.kron(np.asarray(x, dtype=complex), np.eye(self.a))

    def embed_commutant(self, y) -> np.ndarray:
        """``I ⊗ y`` in M′."""
        return np.kron(np.eye(self.a), np.asarray(y, dtype=complex))

    def matrix_units(self):
        a = self.a
        for p in range(a):
            for q in range(a):
                e = np.zeros((a, a), dtype=complex)
                e[p, q] = 1.0
                yield e


@dataclass(frozen=True, eq=False)
class ModularData:
    """Tomita operator ``S = J Δ^{1/2}``; ``S`` and ``J`` are conjugate-linear."""

    S: ConjLinearMap
    J: ConjLinearMap
    Delta: np.ndarray


def brute_force_modular(model: MatrixModel) -> ModularData:
    """Solve ``S(xξ) = x*ξ`` over the matrix units of M, then polar-decompose."""
    if not model.separating:
        raise ValueError("vector is not separating: some weight is zero")
    xi = model.xi
    X = np.stack([model.embed(e) @ xi for e in model.matrix_units()], axis=1)
    Y = np.stack([model.embed(e.conj().T) @ xi for e in model.matrix_units()], axis=1)
    # A conj(X) = Y
    A = np.linalg.solve(np.conj(X).T, Y.T).T
    S = ConjLinearMap(A)
    Delta = A.T @ np.conj(A)
    Delta = 0.5 * (Delta + Delta.conj().T)
    inv_half = hermitian_function(Delta, lambda w: 1.0 / np.sqrt(w))
    J = ConjLinearMap(A @ np.conj(inv_half))
    return ModularData(S, J, Delta)


def vector_from_op(X, model: MatrixModel) -> np.ndarray:
    """``X ↦ Xξ``; ``X`` is either ``a × a`` (meaning ``X ⊗ I``) or already in M."""
    X = np.asarray(X, dtype=complex)
    if X.shape == (model.a, model.a):
        X = model.embed(X)
    return X @ model.xi


def op_from_vector(h, model: MatrixModel) -> np.ndarray:
    """Inverse of :func:`vector_from_op`: the ``x`` in ``B(C^a)`` with ``(x ⊗ I)ξ = h``."""
    if not model.separating:
        raise ValueError("vector is not separating: some weight is zero")
    h = np.asarray(h, dtype=complex).reshape(model.a, model.a)
    # ((x ⊗ I) ξ)[i, j] = x[i, j] λ_j
    return h / model.weights[None, :]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Operator ``k₁ -> k₂ ⊗ H`` stored as a ``(k₂·h, k₁)`` matrix."""

    B: np.ndarray
    h: int

    def __post_init__(self):
        B = np.asarray(self.B, dtype=complex)
        if B.ndim != 2 or B.shape[0] % self.h:
            raise ValueError(f"row count {B.shape[0]} is not a multiple of h={self.h}")
        object.__setattr__(self, "B", B)

    @property
    def k1(self) -> int:
        return self.B.shape[1]

    @property
    def k2(self) -> int:
        return self.B.shape[0] // self.h

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.B))

    def left(self, Y) -> "OperatorMatrix":
        """``(Y ⊗ I) B``."""
        return OperatorMatrix(np.kron(np.asarray(Y), np.eye(self.h)) @ self.B, self.h)

    def right(self, Z) -> "OperatorMatrix":
        """``B Z``."""
        return OperatorMatrix(self.B @ np.asarray(Z), self.h)

    def __add__(self, other):
        return OperatorMatrix(self.B + other.B, self.h)

    def __sub__(self, other):
        return OperatorMatrix(self.B - other.B, self.h)

    @classmethod
    def simple(cls, A, eta) -> "OperatorMatrix":
        """``A ⊗ |η⟩``: ``c ↦ Ac ⊗ η``."""
        A = np.asarray(A, dtype=complex)
        eta = np.asarray(eta, dtype=complex)
        return cls(np.kron(A, eta[:, None]), eta.size)


def partial_transpose(B: OperatorMatrix) -> OperatorMatrix:
    """Transpose on the multiplicity legs: ``B_⊤[(a, v), b] = B[(b, v), a]``."""
    T = B.B.reshape(B.k2, B.h, B.k1).transpose(2, 1, 0)
    return OperatorMatrix(T.reshape(B.k1 * B.h, B.k2), B.h)


def conjugate(B: OperatorMatrix, S: ConjLinearMap) -> OperatorMatrix:
    """``(k₂ ⊗ S) ∘ B ∘ k₁``, a linear operator with matrix ``(I ⊗ A_S) conj(B)``."""
    big = np.kron(np.eye(B.k2), S.kernel)
    return OperatorMatrix(big @ np.conj(B.B), B.h)


def dagger(B: OperatorMatrix, S: ConjLinearMap) -> OperatorMatrix:
    """``B_† = (conjugate B)_⊤``."""
    return partial_transpose(conjugate(B, S))


def dagger_from_identity(B: OperatorMatrix, model: MatrixModel) -> OperatorMatrix:
    """Dagger solved from ``⟨c₁ ⊗ x′ξ, B_† c₂⟩ = ⟨B c₁, c₂ ⊗ x′*ξ⟩`` over ``x′`` in M′.

    Uses only inner products and commutant adjoints, no Tomita operator.
    """
    xi = model.xi
    units = list(model.matrix_units())
    G = np.stack([np.conj(model.embed_commutant(e) @ xi) for e in units])  # rows: conj(x′ξ)
    star = [model.embed_commutant(e.conj().T) @ xi for e in units]
    h = model.h
    out = np.zeros((B.k1 * h, B.k2), dtype=complex)
    for b in range(B.k2):
        for a in range(B.k1):
            Bc1 = B.B[:, a]
            rhs = np.array([np.vdot(Bc1, np.kron(np.eye(B.k2)[b], s)) for s in star])
            out[a * h:(a + 1) * h, b] = np.linalg.solve(G, rhs)
    return OperatorMatrix(out, h)


@dataclass(frozen=True, eq=False)
class BlockIntegrandMatrix:
    """``[[0, R], [C, 0]]`` on ``C ⊕ k``: ``C : C -> k ⊗ H`` and ``R : k -> C ⊗ H``."""

    C: OperatorMatrix
    R: OperatorMatrix

    def __post_init__(self):
        if self.C.k1 != 1 or self.R.k2 != 1:
            raise ValueError("C must be a column (k₁ = 1) and R a row (k₂ = 1)")
        if self.C.k2 != self.R.k1 or self.C.h != self.R.h:
            raise ValueError("C and R dimensions are inconsistent")

    @property
    def k(self) -> int:
        return self.C.k2

    @classmethod
    def zero(cls, k: int, h: int) -> "BlockIntegrandMatrix":
        return cls(OperatorMatrix(np.zeros((k * h, 1)), h), OperatorMatrix(np.zeros((h, k)), h))


def column_transform(F: BlockIntegrandMatrix) -> OperatorMatrix:
    """``F^[] = [C; R_⊤]``, a column over ``k ⊕ k``."""
    return OperatorMatrix(np.vstack([F.C.B, partial_transpose(F.R).B]), F.C.h)


def block_dagger(F: BlockIntegrandMatrix, S: ConjLinearMap) -> BlockIntegrandMatrix:
    """Dagger of the block matrix: ``[[0, C_†], [R_†, 0]]``."""
    return BlockIntegrandMatrix(dagger(F.R, S), dagger(F.C, S))


def flip_conjugate_column(col: OperatorMatrix, S: ConjLinearMap) -> OperatorMatrix:
    """``(k^π ⊗ S)`` applied to a column over ``k ⊕ k``: swap halves, conjugate, apply S."""
    k2 = col.k2 // 2
    halves = col.B.reshape(2, k2 * col.h, col.k1)
    swapped = np.concatenate([halves[1], halves[0]], axis=0)
    return conjugate(OperatorMatrix(swapped, col.h), S)
