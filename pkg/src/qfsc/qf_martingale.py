"""Quasifree martingales, integrals and their representation at vector level.

The initial space is trivial, so the cyclic vector is the Fock vacuum and a
quasifree integrand ``F = [[0, M], [L, 0]]`` is carried by its column
``q = F^[]ξ``: an adapted process whose C^{2d} leg splits as ``(Lξ, M^⊤ξ)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adapted import AdaptedProcess, AdaptedSpace, Reconstruction, VectorMartingale
from .fock import FockOperator
from .linalg import ConjLinearMap
from .phase_space import SigmaMap, iota
from .report import CheckReport

__all__ = [
    "QfIntegrand",
    "QfMartingale",
    "conditional_expectation",
    "qf_integral",
    "creation_integral",
    "annihilation_integral",
    "exponential_martingale",
    "represent",
    "dagger_martingale",
    "exponential_residual_closed_form",
]


@dataclass(eq=False)
class QfIntegrand:
    """Column process ``q_j = F_j^[]ξ`` of a quasifree integrand."""

    q: AdaptedProcess

    @classmethod
    def from_blocks(cls, L, Mt) -> "QfIntegrand":
        """Assemble from the creation part ``Lξ`` and annihilation part ``M^⊤ξ``, each ``(m, d, dim)``."""
        return cls(AdaptedProcess(np.concatenate([np.asarray(L), np.asarray(Mt)], axis=1)))

    @property
    def d(self) -> int:
        return self.q.values.shape[1] // 2

    def creation_part(self) -> "QfIntegrand":
        v = self.q.values.copy()
        v[:, self.d:] = 0.0
        return QfIntegrand(AdaptedProcess(v))

    def annihilation_part(self) -> "QfIntegrand":
        v = self.q.values.copy()
        v[:, : self.d] = 0.0
        return QfIntegrand(AdaptedProcess(v))


@dataclass(eq=False)
class QfMartingale:
    """Vector martingale plus, when available, the Weyl data of its operators."""

    x: VectorMartingale
    prefixes: list | None = None  # mode vectors u_j with X_j = e^{½‖u_j‖²} W₀(u_j)
    integrand: QfIntegrand | None = None
    meta: dict = field(default_factory=dict)

    def operator(self, space: AdaptedSpace, j: int) -> FockOperator:
        """Dense ``X_j`` (only for Weyl-built martingales)."""
        if self.prefixes is None:
            raise ValueError("no operator data for this martingale")
        u = self.prefixes[j]
        W = space.fock.weyl(u)
        return float(np.exp(0.5 * np.vdot(u, u).real)) * W


def conditional_expectation(space: AdaptedSpace, x, j: int):
    """Vector-level conditional expectation ``P_j``; stops a martingale at ``j``."""
    if isinstance(x, QfMartingale):
        return QfMartingale(conditional_expectation(space, x.x, j))
    if isinstance(x, VectorMartingale):
        return VectorMartingale(np.stack([space.project_Pt(j, xk) for xk in x.xs]))
    return space.project_Pt(j, x)


def qf_integral(space: AdaptedSpace, F: QfIntegrand, sigma: SigmaMap, upto: int | None = None) -> np.ndarray:
    """``Λ^Σ_upto(F)ξ = I^Σ_upto(F^[]ξ)``."""
    return space.ito_sigma(F.q, sigma, upto)


def creation_integral(space: AdaptedSpace, L, sigma: SigmaMap, upto: int | None = None) -> np.ndarray:
    """Integral of ``[[0, 0], [L, 0]]``; ``L`` holds the vectors ``L_jξ``, shape ``(m, d, dim)``."""
    L = np.asarray(L, dtype=complex)
    return qf_integral(space, QfIntegrand.from_blocks(L, np.zeros_like(L)), sigma, upto)


def annihilation_integral(space: AdaptedSpace, Mt, sigma: SigmaMap, upto: int | None = None) -> np.ndarray:
    """Integral of ``[[0, M], [0, 0]]``; ``Mt`` holds the vectors ``M_j^⊤ξ``, shape ``(m, d, dim)``."""
    Mt = np.asarray(Mt, dtype=complex)
    return qf_integral(space, QfIntegrand.from_blocks(np.zeros_like(Mt), Mt), sigma, upto)


def _prefix_vectors(space: AdaptedSpace, f, sigma: SigmaMap) -> list:
    g = space.grid
    f = np.asarray(f, dtype=complex).reshape(g.m, g.d)
    out = []
    for j in range(g.m + 1):
        fj = np.zeros_like(f)
        fj[:j] = f[:j]
        out.append(sigma.apply_iota(fj))
    return out


def exponential_martingale(space: AdaptedSpace, f, sigma: SigmaMap, budget: float = 0.5) -> QfMartingale:
    """Stochastic exponential ``E_j = e^{½‖Σι(f_{≤j})‖²} W(f_{≤j})`` and its integrand.

    ``x_j = E_jΩ`` is computed with the truncated Weyl exponential.  The
    integrand column uses the left endpoint of every bin,
    ``q_j = ι(f_j) ⊗ E_{j-1}Ω``, so that ``x_j - x_{j-1}`` is approximated by
    ``a†(Σ_j ι(f_j)) E_{j-1}Ω``.
    """
    g = space.grid
    f = np.asarray(f, dtype=complex).reshape(g.m, g.d)
    prefixes = _prefix_vectors(space, f, sigma)
    norms = [float(np.sqrt(np.vdot(u, u).real)) for u in prefixes]
    vac = space.fock.vacuum()
    xs = np.stack([np.exp(0.5 * n**2) * space.fock.weyl_apply(u, vac) for u, n in zip(prefixes, norms)])
    q = np.zeros((g.m, g.n, space.dim), dtype=complex)
    for j in range(g.m):
        q[j] = np.outer(iota(f[j]), xs[j])
    integrand = QfIntegrand(space.project_adapted(AdaptedProcess(q)))
    meta = {"max_prefix_norm": max(norms), "within_budget": max(norms) <= budget}
    return QfMartingale(VectorMartingale(xs), prefixes, integrand, meta)


def exponential_residual_closed_form(bin_norms2) -> float:
    """Untruncated representation residual of a sampled exponential martingale.

    With ``a_j = ‖Σι(f_j)‖²`` the increments beyond first order have squared
    norm ``Σ_j e^{a_1+...+a_{j-1}} (e^{a_j} - 1 - a_j)``.
    """
    a = np.asarray(bin_norms2, dtype=float)
    past = np.concatenate([[0.0], np.cumsum(a)[:-1]])
    return float(np.sqrt(np.sum(np.exp(past) * np.expm1(a) - np.exp(past) * a)))


def represent(space: AdaptedSpace, x, sigma: SigmaMap) -> tuple[QfIntegrand, Reconstruction]:
    """Integrand with ``x_t - x_0 = Λ^Σ_t(F)ξ`` and the per-bin residuals."""
    xm = x.x if isinstance(x, QfMartingale) else x
    rec = space.reconstruct_integrand(xm, sigma)
    return QfIntegrand(rec.z), rec


def dagger_martingale(space: AdaptedSpace, x, q: QfIntegrand, sigma: SigmaMap, S_fock: FockOperator,
                      k_pi: ConjLinearMap, tol: float = 1e-6, reference=None) -> CheckReport:
    """Check ``S(x_t - x_0) = Λ^Σ_t(F†)ξ`` with ``F†^[]ξ = (k^π ⊗ S) F^[]ξ`` pointwise.

    If ``reference`` (a :class:`VectorMartingale` built independently for the
    adjoint process) is given, also compare ``S x_t`` with it.
    """
    xm = x.x if isinstance(x, QfMartingale) else x
    rep = space.theoremX_b_check(xm, q.q, S_fock, k_pi, sigma, tol)
    worst_ref = 0.0
    if reference is not None:
        for t in range(xm.m + 1):
            worst_ref = max(worst_ref, float(np.linalg.norm(S_fock @ xm[t] - reference[t])))
    return CheckReport(
        "adjoint_martingale", max(rep.max_deviation, worst_ref), tol,
        ref="adjoint of a represented martingale is the integral of the adjoint integrand",
        params=rep.params,
        details={"integral_deviation": rep.max_deviation, "reference_deviation": worst_ref},
    )
