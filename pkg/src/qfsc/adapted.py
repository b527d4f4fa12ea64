"""Discrete-time adapted calculus on a truncated Fock space.

Time is cut into ``m`` bins; bin ``j`` (0-based) owns the ``2d`` modes
``j*2d .. (j+1)*2d - 1``.  A process ``z`` has shape ``(m, 2d, dim)``: entry
``z[j, α]`` is the Fock vector paired with mode ``α`` of bin ``j``.  It is
adapted when ``z[j]`` lives on states with no particle in bins ``≥ j`` and at
most ``cutoff - 1`` particles in total.  The second condition keeps creation
exact on the truncated space, so the Itô isometry holds to rounding error.

The bin width ``dt`` is metadata only; ``√dt`` is absorbed into coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fock import FockOperator, TruncatedFock
from .linalg import ConjLinearMap
from .phase_space import SigmaMap
from .report import CheckReport

__all__ = [
    "TimeGrid",
    "AdaptedProcess",
    "VectorMartingale",
    "WeylProcess",
    "AdaptedSpace",
    "Reconstruction",
]


@dataclass(frozen=True)
class TimeGrid:
    d: int
    m: int
    dt: float = 1.0

    @property
    def n(self) -> int:
        return 2 * self.d

    @property
    def modes(self) -> int:
        return self.m * self.n

    def bin_modes(self, j: int) -> slice:
        return slice(j * self.n, (j + 1) * self.n)

    def modes_from(self, j: int) -> slice:
        """Modes of bins ``j, j+1, ..., m-1`` (0-based)."""
        return slice(j * self.n, self.modes)


@dataclass(eq=False)
class AdaptedProcess:
    """Per-bin vectors ``z_j`` in C^{2d} ⊗ Fock, stored as an ``(m, 2d, dim)`` array."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def bin_norms2(self) -> np.ndarray:
        return np.sum(np.abs(self.values) ** 2, axis=(1, 2))

    def norm(self) -> float:
        return float(np.sqrt(self.bin_norms2().sum()))

    def truncated(self, upto: int) -> "AdaptedProcess":
        """Keep bins ``< upto`` and zero the rest."""
        v = self.values.copy()
        v[upto:] = 0.0
        return AdaptedProcess(v)

    def apply_leg(self, blocks) -> "AdaptedProcess":
        """Left-multiply each ``z_j`` by ``blocks[j]`` on the C^{2d} leg."""
        return AdaptedProcess(np.einsum("jab,jbk->jak", blocks, self.values))

    def __sub__(self, other: "AdaptedProcess") -> "AdaptedProcess":
        return AdaptedProcess(self.values - other.values)

    def __add__(self, other: "AdaptedProcess") -> "AdaptedProcess":
        return AdaptedProcess(self.values + other.values)


@dataclass(eq=False)
class VectorMartingale:
    """Fock vectors ``x_0, ..., x_m`` with ``P_j x_k = x_j`` for ``j ≤ k``."""

    xs: np.ndarray

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=complex)

    @property
    def m(self) -> int:
        return self.xs.shape[0] - 1

    def __getitem__(self, j):
        return self.xs[j]


@dataclass(eq=False)
class WeylProcess:
    """Adapted process whose entries are sums ``Σ c ⊗ W(g) Ω`` with ``g`` in the past.

    ``terms[j]`` is a list of ``(c, g)`` pairs, ``c`` in C^{2d} and ``g`` a
    step function in C^{m·d} supported on bins ``< j``.  Because the Fock legs
    are Weyl vectors, the action of the Tomita operator on them is known in
    closed form (``W(g)Ω -> W(-g)Ω``), which gives a truncation-free
    reference for the modular identities.
    """

    terms: list
    sigma: SigmaMap

    def _leg_vector(self, space: "AdaptedSpace", g, exact: bool) -> np.ndarray:
        u = self.sigma.apply_iota(g)
        if exact:
            return space.fock.coherent(u)
        return space.fock.weyl_apply(u, space.fock.vacuum())

    def vectors(self, space: "AdaptedSpace", exact: bool = False) -> AdaptedProcess:
        """Truncated-pipeline vectors (``exact=False``) or exact coefficients (``exact=True``)."""
        out = np.zeros((space.grid.m, space.grid.n, space.fock.dim), dtype=complex)
        for j, bin_terms in enumerate(self.terms):
            for c, g in bin_terms:
                out[j] += np.outer(c, self._leg_vector(space, g, exact))
        return space.project_adapted(AdaptedProcess(out))


@dataclass(eq=False)
class Reconstruction:
    z: AdaptedProcess
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals, initial=0.0))


class AdaptedSpace:
    """Fock space over ``m`` bins of ``2d`` modes with the adapted calculus on it.

    Parameters
    ----------
    d, m : int
        Multiplicity and number of bins.
    cutoff : int
        Particle cutoff of the Fock space.
    dt : float
        Bin width (reporting only).
    """

    def __init__(self, d: int, m: int, cutoff: int, dt: float = 1.0):
        self.grid = TimeGrid(d, m, dt)
        self.fock = TruncatedFock(self.grid.modes, cutoff)
        F = self.fock
        # no particles in bins >= j, for j = 0..m
        self._p_masks = np.stack(
            [F.particles_in(self.grid.modes_from(j)) == 0 for j in range(m)] + [np.ones(F.dim, bool)]
        )
        self._adapted_masks = self._p_masks[:m] & (F.total < F.cutoff)[None, :]

    def __repr__(self):
        g = self.grid
        return f"AdaptedSpace(d={g.d}, m={g.m}, cutoff={self.fock.cutoff}, dim={self.fock.dim})"

    @property
    def dim(self) -> int:
        return self.fock.dim

    def _mode(self, j: int, a: int) -> int:
        return j * self.grid.n + a

    # -- projections --------------------------------------------------------

    def project_Pt(self, j: int, x) -> np.ndarray:
        """Drop every component with a particle in bins ``> j`` (1-based), ``0 ≤ j ≤ m``."""
        if not 0 <= j <= self.grid.m:
            raise IndexError(f"bin index {j} outside 0..{self.grid.m}")
        return np.where(self._p_masks[j], x, 0.0)

    def adapted_mask(self, j: int) -> np.ndarray:
        return self._adapted_masks[j]

    def is_adapted(self, z: AdaptedProcess, tol: float = 0.0) -> bool:
        outside = np.where(self._adapted_masks[:, None, :], 0.0, z.values)
        return bool(np.max(np.abs(outside), initial=0.0) <= tol)

    def project_adapted(self, z: AdaptedProcess) -> AdaptedProcess:
        """Orthogonal projection onto adapted processes."""
        return AdaptedProcess(np.where(self._adapted_masks[:, None, :], z.values, 0.0))

    def random_adapted(self, rng, scale: float = 1.0) -> AdaptedProcess:
        g = self.grid
        shape = (g.m, g.n, self.dim)
        z = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return self.project_adapted(AdaptedProcess(scale * z))

    def zero_process(self) -> AdaptedProcess:
        g = self.grid
        return AdaptedProcess(np.zeros((g.m, g.n, self.dim), dtype=complex))

    # -- integral and gradient ------------------------------------------------

    def ito(self, z: AdaptedProcess, check: bool = True) -> np.ndarray:
        """Itô integral ``Σ_j Σ_α a†_{jα} z[j, α]``."""
        if check and not self.is_adapted(z):
            raise ValueError("process is not adapted")
        out = np.zeros(self.dim, dtype=complex)
        for j in range(self.grid.m):
            for a in range(self.grid.n):
                col = z.values[j, a]
                if np.any(col):
                    out += self.fock.mode_creation(self._mode(j, a)) @ col
        return out

    def adapted_gradient(self, x) -> AdaptedProcess:
        """Adjoint of :meth:`ito`: ``(Dx)[j, α] = (adapted part of) a_{jα} x``."""
        out = np.zeros((self.grid.m, self.grid.n, self.dim), dtype=complex)
        for j in range(self.grid.m):
            for a in range(self.grid.n):
                ann = self.fock.mode_creation(self._mode(j, a)).T
                out[j, a] = np.where(self._adapted_masks[j], ann @ x, 0.0)
        return AdaptedProcess(out)

    def ito_sigma(self, z: AdaptedProcess, sigma: SigmaMap, upto: int | None = None) -> np.ndarray:
        """Modified integral: Itô integral of ``(Σ_j z_j)`` over bins ``< upto``."""
        upto = self.grid.m if upto is None else upto
        self._check_sigma(sigma)
        return self.ito(z.truncated(upto).apply_leg(sigma.blocks))

    def ito_sigma_matrix(self, sigma: SigmaMap, upto: int | None = None) -> np.ndarray:
        """Matrix of ``z -> I^Σ_upto z`` on the adapted coordinates (for kernel checks)."""
        upto = self.grid.m if upto is None else upto
        cols = []
        for j in range(upto):
            for a in range(self.grid.n):
                for k in np.nonzero(self._adapted_masks[j])[0]:
                    e = self.zero_process()
                    e.values[j, a, k] = 1.0
                    cols.append(self.ito_sigma(e, sigma, upto))
        return np.stack(cols, axis=1) if cols else np.zeros((self.dim, 0))

    def martingale(self, z: AdaptedProcess, sigma: SigmaMap, x0=None) -> VectorMartingale:
        """``x_j = x_0 + I^Σ_j z`` for ``j = 0..m``."""
        x0 = np.zeros(self.dim, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)
        xs = [x0 + self.ito_sigma(z, sigma, j) for j in range(self.grid.m + 1)]
        return VectorMartingale(np.stack(xs))

    def is_martingale(self, x: VectorMartingale, tol: float = 1e-12) -> bool:
        return self.martingale_defect(x) <= tol

    def martingale_defect(self, x: VectorMartingale) -> float:
        worst = 0.0
        for k in range(x.m + 1):
            for j in range(k + 1):
                worst = max(worst, float(np.linalg.norm(self.project_Pt(j, x[k]) - x[j])))
        return worst

    def reconstruct_integrand(self, x: VectorMartingale, sigma: SigmaMap) -> Reconstruction:
        """Integrand ``z_j = Σ_j^{-1} (D(x_m - x_0))_j`` and per-bin residuals.

        ``residuals[j-1] = ‖(x_j - x_0) - I^Σ_j z‖`` for ``j = 1..m``; they
        vanish for integral-built martingales and measure the part of the
        increments that no adapted integrand can represent.
        """
        self._check_sigma(sigma)
        inv = sigma.inverse_blocks()
        Dx = self.adapted_gradient(x[x.m] - x[0])
        z = Dx.apply_leg(inv)
        res = np.array(
            [np.linalg.norm((x[j] - x[0]) - self.ito_sigma(z, sigma, j)) for j in range(1, x.m + 1)]
        )
        return Reconstruction(z, res)

    # -- modular identities -------------------------------------------------

    def random_weyl_process(self, rng, sigma: SigmaMap, norm: float = 0.5, terms: int = 2,
                            vacuum_past: bool = False) -> WeylProcess:
        """Random :class:`WeylProcess` with ``‖Σι(g)‖ ≤ norm`` on every past leg."""
        g_ = self.grid
        out = []
        for j in range(g_.m):
            bin_terms = []
            for _ in range(terms):
                c = rng.normal(size=g_.n) + 1j * rng.normal(size=g_.n)
                c /= np.linalg.norm(c)
                g = np.zeros(g_.m * g_.d, dtype=complex)
                if j > 0 and not vacuum_past:
                    g[: j * g_.d] = rng.normal(size=j * g_.d) + 1j * rng.normal(size=j * g_.d)
                    g *= rng.uniform(0.2, 1.0) * norm / np.sqrt(sigma.char_norm2(g))
                bin_terms.append((c, g))
            out.append(bin_terms)
        return WeylProcess(out, sigma)

    def modular_ito_commutation_check(self, sigma: SigmaMap, s: ConjLinearMap, trials: int = 5,
                                      seed=0, norm: float = 0.5, tol: float = 1e-6,
                                      vacuum_past: bool = False, S_fock: FockOperator | None = None) -> CheckReport:
        """Compare ``S_Ω I(z)`` with ``I((s ⊗ S_Ω) z)``.

        The left side runs the truncated pipeline: Weyl legs built by the
        truncated exponential, integrated, then hit by ``Γ(s)``.  The right
        side uses the closed-form Tomita action on Weyl legs, evaluated with
        exact exponential-vector coefficients, so the deviation measures the
        truncation error and shrinks as the cutoff grows.
        """
        rng = np.random.default_rng(seed)
        S = self.fock.modular_S(s) if S_fock is None else S_fock
        worst = 0.0
        for _ in range(trials):
            z = self.random_weyl_process(rng, sigma, norm, vacuum_past=vacuum_past)
            lhs = S @ self.ito(z.vectors(self))
            w = _apply_per_bin(z, s.kernel, self.grid.n)
            rhs = self.ito(w.vectors(self, exact=True))
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        return CheckReport(
            "modular_ito_commutation", worst, tol,
            ref="Tomita operator intertwines the Ito integral",
            params={"bins": self.grid.m, "cutoff": self.fock.cutoff, "trials": trials, "norm": norm},
        )

    def theoremX_b_check(self, x: VectorMartingale, z, S_fock: FockOperator, k_pi: ConjLinearMap,
                         sigma: SigmaMap, tol: float = 1e-6) -> CheckReport:
        """Compare ``S(x_t - x_0)`` with ``I^Σ_t((k^π ⊗ S) z)`` for every ``t``.

        ``z`` is either a :class:`WeylProcess` (right side evaluated from the
        closed-form Tomita action on Weyl legs) or an :class:`AdaptedProcess`
        (right side uses ``S_fock`` on the past legs).
        """
        n = self.grid.n
        if isinstance(z, WeylProcess):
            zt = _apply_per_bin(z, k_pi.kernel, n).vectors(self, exact=True)
        else:
            vals = np.empty_like(z.values)
            for j in range(self.grid.m):
                kb = _bin_block(k_pi.kernel, n, j)
                legs = np.stack([S_fock @ z.values[j, a] for a in range(n)])
                vals[j] = kb @ legs
            zt = self.project_adapted(AdaptedProcess(vals))
        worst = 0.0
        for t in range(1, x.m + 1):
            lhs = S_fock @ (x[t] - x[0])
            rhs = self.ito_sigma(zt, sigma, t)
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        return CheckReport(
            "tomita_on_sigma_integral", worst, tol,
            ref="S(x_t - x_0) equals the modified integral of (k_pi x S) z",
            params={"bins": self.grid.m, "cutoff": self.fock.cutoff},
        )

    def _check_sigma(self, sigma: SigmaMap):
        if sigma.m < self.grid.m or sigma.d != self.grid.d:
            raise ValueError(f"Σ has (m={sigma.m}, d={sigma.d}), space has (m={self.grid.m}, d={self.grid.d})")


def _bin_block(A: np.ndarray, n: int, j: int) -> np.ndarray:
    return A[j * n:(j + 1) * n, j * n:(j + 1) * n]


def _apply_per_bin(z: WeylProcess, kernel: np.ndarray, n: int) -> WeylProcess:
    """Pointwise conjugate-linear leg map (per-bin block of ``kernel``) with Tomita action on legs."""
    terms = []
    for j, bin_terms in enumerate(z.terms):
        blk = _bin_block(kernel, n, j)
        terms.append([(blk @ np.conj(c), -np.asarray(g)) for c, g in bin_terms])
    return WeylProcess(terms, z.sigma)
