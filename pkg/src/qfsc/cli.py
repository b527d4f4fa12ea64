"""Command-line entry point: ``qfsc check|modular|expect|martingale|sweep``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .adapted import AdaptedSpace
from .config import Config, ConfigError, load_config
from .fock import fock_dimension
from .matrix_calc import (
    BlockIntegrandMatrix,
    MatrixModel,
    OperatorMatrix,
    brute_force_modular,
    block_dagger,
    column_transform,
    conjugate,
    dagger,
    flip_conjugate_column,
    partial_transpose,
)
from .phase_space import (
    apply_conj_to_subspace,
    build_sigma_prime,
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
from .qf_martingale import (
    annihilation_integral,
    creation_integral,
    exponential_martingale,
    exponential_residual_closed_form,
    represent,
)
from .report import CheckReport
from .weyl_word import expect_truncated, parse, random_word

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_SWEEP_DIM = 100_000


def check_rng(seed: int, name: str) -> np.random.Generator:
    """Generator derived from the run seed and the check name (order independent)."""
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(name.encode())]))


def _rc(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _random_f(rng, sigma, norm):
    f = _rc(rng, sigma.m * sigma.d)
    return f * rng.uniform(0.2, 1.0) * norm / np.sqrt(sigma.char_norm2(f))


class _Context:
    """Objects shared by the checks, built once before the checks run."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.sigma = cfg.sigma()
        self.s = s_omega(self.sigma)
        self.polar = polar_conjlinear(self.s)
        self.space = AdaptedSpace(cfg.d, cfg.bins, cfg.cutoff, cfg.dt)
        self.S_fock = self.space.fock.modular_S(self.s)
        self.kpi = k_pi(cfg.d, cfg.bins)


# -- checks -----------------------------------------------------------------------


def chk_symplectic(ctx, rng):
    rep = check_symplectic(ctx.sigma, 1000, rng, ctx.cfg.tol_exact)
    return CheckReport("phase_space.symplectic", rep.max_deviation, rep.tolerance,
                       "Im<Σι(f),Σι(g)> = Im<f,g>", {"trials": 1000})


def chk_duality(ctx, rng):
    sp = build_sigma_prime(ctx.sigma, ctx.polar.j)
    rep = check_duality(ctx.sigma, sp, 1000, rng, ctx.cfg.tol_exact)
    return CheckReport("phase_space.duality", rep.max_deviation, rep.tolerance,
                       "Im<Σι(f),Σ′ι(conj g)> = 0", {"trials": 1000})


def chk_involution(ctx, rng):
    ss = ctx.s @ ctx.s
    dev = float(np.max(np.abs(ss - np.eye(ss.shape[0]))))
    return CheckReport("phase_space.s_involution", dev, ctx.cfg.tol_exact, "s∘s = I")


def chk_polar(ctx, rng):
    cf = gauge_modular_closed_form(ctx.cfg.T, m=ctx.cfg.bins)
    dev = max(float(np.max(np.abs(cf.delta_half - ctx.polar.delta_half))),
              float(np.max(np.abs(cf.j.kernel - ctx.polar.j.kernel))))
    return CheckReport("phase_space.polar_vs_closed_form", dev, ctx.cfg.tol_exact,
                       "polar data of s equal the gauge closed form (j = flipped conjugation)")


def chk_j_subspaces(ctx, rng):
    H1 = subspace_H1(ctx.sigma)
    H2 = symplectic_complement(H1)
    dev = apply_conj_to_subspace(ctx.polar.j, H1).distance(H2)
    return CheckReport("phase_space.j_maps_H1_to_H2", dev, ctx.cfg.tol_exact, "j H1 = H2")


def chk_generic(ctx, rng):
    H1 = subspace_H1(ctx.sigma)
    gp = generic_position(H1, symplectic_complement(H1))
    return CheckReport("phase_space.generic_position", float(sum(gp.dims)), 0.0,
                       "H1, H2 in generic position", details={"dims": list(gp.dims)})


def chk_iota_span(ctx, rng):
    d, m = ctx.cfg.d, ctx.cfg.bins
    dev = abs(complex_span_dim_iota(d, m) - 2 * d * m)
    return CheckReport("phase_space.iota_complex_span", float(dev), 0.0, "complex span of ι(V) is V ⊕ KV")


def chk_characteristic(ctx, rng):
    F = ctx.space.fock
    worst = 0.0
    for _ in range(20):
        f = _random_f(rng, ctx.sigma, ctx.cfg.weyl_norm)
        val = F.weyl_apply(ctx.sigma.apply_iota(f), F.vacuum())[0]
        worst = max(worst, abs(val - np.exp(-0.5 * ctx.sigma.char_norm2(f))))
    return CheckReport("fock.characteristic_function", worst, ctx.cfg.tol_truncated,
                       "<Ω,W(f)Ω> = exp(-½‖Σι(f)‖²)", {"samples": 20})


def chk_weyl_action(ctx, rng):
    F = ctx.space.fock
    worst = 0.0
    for _ in range(20):
        u, v = _rc(rng, F.modes), _rc(rng, F.modes)
        u *= ctx.cfg.weyl_norm / np.linalg.norm(u)
        v *= ctx.cfg.weyl_norm / np.linalg.norm(v)
        lhs = F.weyl_apply(u, F.coherent(v))
        rhs = np.exp(-1j * np.vdot(u, v).imag) * F.coherent(u + v)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return CheckReport("fock.weyl_action", worst, ctx.cfg.tol_truncated,
                       "W(u)φ(v) = exp(-i Im<u,v>) φ(u+v)", {"samples": 20, "norm": ctx.cfg.weyl_norm})


def chk_functor(ctx, rng):
    F = ctx.space.fock
    n = F.modes
    R1 = _rc(rng, n, n)
    R2 = _rc(rng, n, n)
    R2 /= np.linalg.norm(R2, 2)
    lhs = (F.second_quantize(R1) @ F.second_quantize(R2)).dense()
    rhs = F.second_quantize(R1 @ R2).dense()
    dev = float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs))))
    return CheckReport("fock.second_quantization_product", dev, ctx.cfg.tol_exact,
                       "Γ(R)Γ(C) = Γ(RC) for a contraction C")


def chk_tomita_weyl(ctx, rng):
    F = ctx.space.fock
    worst = 0.0
    for _ in range(10):
        u = ctx.sigma.apply_iota(_random_f(rng, ctx.sigma, 0.5))
        lhs = ctx.S_fock @ F.weyl_apply(u, F.vacuum())
        rhs = F.weyl_apply(-u, F.vacuum())
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return CheckReport("fock.tomita_on_weyl_vectors", worst, ctx.cfg.tol_truncated, "S W(f)Ω = W(-f)Ω")


def chk_ito_isometry(ctx, rng):
    A = ctx.space
    worst = 0.0
    for _ in range(10):
        z = A.random_adapted(rng)
        for t in range(1, A.grid.m + 1):
            lhs = np.linalg.norm(A.ito_sigma(z, ctx.sigma, t)) ** 2
            rhs = z.truncated(t).apply_leg(ctx.sigma.blocks).norm() ** 2
            worst = max(worst, abs(lhs - rhs) / rhs)
    return CheckReport("adapted.ito_isometry", worst, ctx.cfg.tol_exact,
                       "‖I^Σ_t z‖² = Σ_{j≤t} ‖Σ_j z_j‖² (relative)")


def chk_gradient(ctx, rng):
    A = ctx.space
    worst = 0.0
    for _ in range(10):
        z = A.random_adapted(rng)
        worst = max(worst, float(np.max(np.abs(A.adapted_gradient(A.ito(z)).values - z.values))))
    return CheckReport("adapted.gradient_inverts_integral", worst, ctx.cfg.tol_exact, "D I = id on adapted processes")


def chk_modular_ito(ctx, rng):
    rep = ctx.space.modular_ito_commutation_check(ctx.sigma, ctx.s, trials=3, seed=rng,
                                                  tol=ctx.cfg.tol_truncated, S_fock=ctx.S_fock)
    rep.name = "adapted.modular_ito_commutation"
    return rep


def chk_tomita_integral(ctx, rng):
    A = ctx.space
    wp = A.random_weyl_process(rng, ctx.sigma, 0.5)
    x = A.martingale(wp.vectors(A), ctx.sigma, A.fock.vacuum())
    rep = A.theoremX_b_check(x, wp, ctx.S_fock, ctx.kpi, ctx.sigma, ctx.cfg.tol_truncated)
    rep.name = "adapted.tomita_on_sigma_integral"
    return rep


def chk_tomita_matrix(ctx, rng):
    model = MatrixModel(np.sqrt([0.8, 0.2]))
    md = brute_force_modular(model)
    spectrum = np.sort(np.linalg.eigvalsh(md.Delta))
    dev = float(np.max(np.abs(spectrum - np.array([0.25, 1.0, 1.0, 4.0]))))
    for e in model.matrix_units():
        dev = max(dev, float(np.max(np.abs(md.S(model.embed(e) @ model.xi) - model.embed(e.conj().T) @ model.xi))))
    return CheckReport("matrix_calc.tomita_brute_force", dev, ctx.cfg.tol_exact,
                       "spectrum of Δ is {4,1,1,1/4} and S(xξ) = x*ξ", {"weights": [0.8, 0.2]})


def chk_dagger(ctx, rng):
    model = MatrixModel(np.sqrt([0.8, 0.2]))
    S = brute_force_modular(model).S
    h = model.h
    worst = 0.0
    for _ in range(20):
        B = OperatorMatrix(_rc(rng, 3 * h, 2), h)
        Bd = dagger(B, S)
        cb = conjugate(B, S).B
        worst = max(worst,
                    float(np.max(np.abs(partial_transpose(partial_transpose(B)).B - B.B))),
                    float(np.max(np.abs(dagger(Bd, S).B - B.B))),
                    float(np.max(np.abs(partial_transpose(Bd).B - cb))),
                    float(np.max(np.abs(dagger(partial_transpose(B), S).B - cb))))
    return CheckReport("matrix_calc.transpose_dagger", worst, ctx.cfg.tol_exact,
                       "B_⊤⊤ = B_†† = B and B_†⊤ = B_⊤† = conjugate(B)", {"instances": 20})


def chk_column(ctx, rng):
    model = MatrixModel(np.sqrt([0.8, 0.2]))
    S = brute_force_modular(model).S
    h = model.h
    worst = 0.0
    for _ in range(20):
        F = BlockIntegrandMatrix(OperatorMatrix(_rc(rng, 2 * h, 1), h), OperatorMatrix(_rc(rng, h, 2), h))
        lhs = column_transform(block_dagger(F, S)).B
        rhs = flip_conjugate_column(column_transform(F), S).B
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return CheckReport("matrix_calc.column_transform_dagger", worst, ctx.cfg.tol_exact,
                       "column of F† equals (k_pi ⊗ S) applied to the column of F", {"instances": 20})


def chk_roundtrip(ctx, rng):
    A = ctx.space
    worst = 0.0
    for _ in range(5):
        z = A.random_adapted(rng)
        x = A.martingale(z, ctx.sigma, A.fock.vacuum())
        q, rec = represent(A, x, ctx.sigma)
        worst = max(worst, float(np.max(np.abs(q.q.values - z.values))), rec.max_residual)
    return CheckReport("qf_martingale.representation_roundtrip", worst, ctx.cfg.tol_exact,
                       "integrate then represent recovers the integrand")


def chk_martingale(ctx, rng):
    A = ctx.space
    worst = 0.0
    for _ in range(5):
        x = A.martingale(A.random_adapted(rng), ctx.sigma, A.fock.vacuum())
        worst = max(worst, A.martingale_defect(x))
    return CheckReport("qf_martingale.martingale_property", worst, ctx.cfg.tol_exact,
                       "P_s x_t = x_s for quasifree integrals")


def chk_orthogonality(ctx, rng):
    A = ctx.space
    d = ctx.cfg.d
    gauge = bool(all(np.allclose(b[:d, d:], 0) and np.allclose(b[d:, :d], 0) for b in ctx.sigma.blocks))
    worst = 0.0
    for _ in range(5):
        z = A.random_adapted(rng).values
        w = A.random_adapted(rng).values
        ci = creation_integral(A, z[:, :d], ctx.sigma)
        ai = annihilation_integral(A, w[:, d:], ctx.sigma)
        worst = max(worst, abs(np.vdot(ci, ai)))
    tol = ctx.cfg.tol_exact if gauge else float("inf")
    return CheckReport("qf_martingale.creation_annihilation_orthogonality", worst, tol,
                       "creation and annihilation integrals are orthogonal for gauge-invariant states",
                       details={"gauge_invariant": gauge})


def chk_exp_adjoint(ctx, rng):
    A = ctx.space
    f = _rc(rng, ctx.cfg.bins * ctx.cfg.d)
    f *= 0.5 / np.sqrt(ctx.sigma.char_norm2(f))
    ef = exponential_martingale(A, f, ctx.sigma)
    em = exponential_martingale(A, -f, ctx.sigma)
    worst = max(float(np.linalg.norm(ctx.S_fock @ ef.x[t] - em.x[t])) for t in range(ctx.cfg.bins + 1))
    return CheckReport("qf_martingale.exponential_adjoint", worst, ctx.cfg.tol_truncated,
                       "S E^f Ω = E^{-f} Ω")


def chk_words(ctx, rng):
    names = ["f", "g", "h"]
    worst = 0.0
    n = ctx.cfg.trials
    for _ in range(n):
        env = {k: _random_f(rng, ctx.sigma, 0.4) for k in names}
        w = parse(random_word(rng, names), env)
        worst = max(worst, expect_truncated(w, ctx.sigma, fock=ctx.space.fock).diff)
    return CheckReport("weyl_word.expectation_cross_validation", worst, ctx.cfg.tol_truncated,
                       "truncated vacuum expectation equals the characteristic-function value",
                       {"words": n})


CHECKS = {
    "phase_space.symplectic": chk_symplectic,
    "phase_space.duality": chk_duality,
    "phase_space.s_involution": chk_involution,
    "phase_space.polar_vs_closed_form": chk_polar,
    "phase_space.j_maps_H1_to_H2": chk_j_subspaces,
    "phase_space.generic_position": chk_generic,
    "phase_space.iota_complex_span": chk_iota_span,
    "fock.characteristic_function": chk_characteristic,
    "fock.weyl_action": chk_weyl_action,
    "fock.second_quantization_product": chk_functor,
    "fock.tomita_on_weyl_vectors": chk_tomita_weyl,
    "adapted.ito_isometry": chk_ito_isometry,
    "adapted.gradient_inverts_integral": chk_gradient,
    "adapted.modular_ito_commutation": chk_modular_ito,
    "adapted.tomita_on_sigma_integral": chk_tomita_integral,
    "matrix_calc.tomita_brute_force": chk_tomita_matrix,
    "matrix_calc.transpose_dagger": chk_dagger,
    "matrix_calc.column_transform_dagger": chk_column,
    "qf_martingale.representation_roundtrip": chk_roundtrip,
    "qf_martingale.martingale_property": chk_martingale,
    "qf_martingale.creation_annihilation_orthogonality": chk_orthogonality,
    "qf_martingale.exponential_adjoint": chk_exp_adjoint,
    "weyl_word.expectation_cross_validation": chk_words,
}


def _round(x):
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(f"{x:.6e}")


def run_checks(cfg: Config, seed: int) -> list[CheckReport]:
    ctx = _Context(cfg)

    def run(name):
        rep = CHECKS[name](ctx, check_rng(seed, name))
        rep.name = name
        return rep

    workers = max(1, int(os.environ.get("QFSC_THREADS", os.cpu_count() or 1)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(run, sorted(CHECKS)))
    return sorted(reports, key=lambda r: r.name)


def build_report(cfg: Config, seed: int, reports: list[CheckReport]) -> dict:
    checks = []
    for r in reports:
        d = r.to_dict()
        d["max_deviation"] = _round(d["max_deviation"])
        d["tolerance"] = _round(d["tolerance"])
        checks.append(d)
    passed = sum(r.passed for r in reports)
    return {
        "version": __version__,
        "seed": seed,
        "config": cfg.to_dict(),
        "checks": checks,
        "summary": {"total": len(reports), "passed": passed, "failed": len(reports) - passed},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _write(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- subcommands ------------------------------------------------------------------


def cmd_check(args, cfg: Config) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    reports = run_checks(cfg, seed)
    report = build_report(cfg, seed, reports)
    _write(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out or "report.json")
    for r in reports:
        print(f"{r.status.upper():4}  {r.name:52s} {r.max_deviation:.3e}  (tol {r.tolerance:.1e})", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _fmt_matrix(a) -> list:
    a = np.asarray(a)
    return [[[_round(x.real), _round(x.imag)] for x in row] for row in a]


def cmd_modular(args, cfg: Config) -> int:
    sigma = cfg.sigma()
    s = s_omega(sigma)
    polar = polar_conjlinear(s)
    ss = s @ s
    out = {
        "s_kernel": _fmt_matrix(s.kernel),
        "j_kernel_polar": _fmt_matrix(polar.j.kernel),
        "delta_half_polar": _fmt_matrix(polar.delta_half),
        "s_squared_deviation": _round(np.max(np.abs(ss - np.eye(ss.shape[0])))),
    }
    np.set_printoptions(precision=8, suppress=True)
    print("s kernel (v -> A conj v):\n", s.kernel)
    print("j kernel (polar):\n", polar.j.kernel)
    print("delta^1/2 (polar):\n", polar.delta_half)
    print(f"max |s∘s - I| = {out['s_squared_deviation']:.3e}")
    if cfg.kind == "gauge" or np.allclose(np.asarray(cfg.P), 0):
        cf = gauge_modular_closed_form(cfg.T, m=cfg.bins)
        diff = max(np.max(np.abs(cf.delta_half - polar.delta_half)), np.max(np.abs(cf.j.kernel - polar.j.kernel)))
        out["delta_half_closed_form"] = _fmt_matrix(cf.delta_half)
        out["closed_form_max_diff"] = _round(diff)
        print("delta^1/2 (closed form):\n", cf.delta_half)
        print(f"max diff closed form vs polar = {diff:.3e}")
    else:
        print("no closed form for P != 0; polar data only")
    if args.out:
        _write(json.dumps(out, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_expect(args, cfg: Config) -> int:
    if not args.word:
        raise ConfigError("expect needs --word")
    sigma = cfg.sigma()
    word = parse(args.word, cfg.functions)
    res = expect_truncated(word, sigma, cutoff=cfg.cutoff)
    out = {"word": args.word, "exact": [res.exact.real, res.exact.imag],
           "truncated": [res.truncated.real, res.truncated.imag], "diff": res.diff, "warnings": res.warnings}
    print(f"exact     = {res.exact:.12g}")
    print(f"truncated = {res.truncated:.12g}")
    print(f"diff      = {res.diff:.3e}")
    if args.out:
        _write(json.dumps(out, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def sweep_cutoff(modes: int, cutoff: int) -> int:
    """Largest cutoff ≤ ``cutoff`` whose Fock dimension stays below the sweep budget."""
    n = cutoff
    while n > 2 and fock_dimension(modes, n) > MAX_SWEEP_DIM:
        n -= 1
    return n


def exp_residual(cfg: Config, bins: int, cutoff: int):
    """Representation residual of the sampled exponential martingale at fixed horizon."""
    sigma = cfg.sigma(bins)
    N = sweep_cutoff(bins * 2 * cfg.d, cutoff)
    space = AdaptedSpace(cfg.d, bins, N)
    f1 = np.ones(cfg.d, dtype=complex)
    scale = np.sqrt(cfg.horizon / sigma.truncated(1).char_norm2(f1) / bins)
    f = np.tile(scale * f1, bins)
    E = exponential_martingale(space, f, sigma)
    _, rec = represent(space, E, sigma)
    fb = f.reshape(bins, cfg.d)
    per_bin = [float(np.linalg.norm(sigma.blocks[j] @ iota(fb[j])) ** 2) for j in range(bins)]
    return N, float(rec.residuals[-1]), exponential_residual_closed_form(per_bin)


def cmd_martingale(args, cfg: Config) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    rng = check_rng(seed, "martingale")
    space = AdaptedSpace(cfg.d, cfg.bins, cfg.cutoff, cfg.dt)
    sigma = cfg.sigma()
    z = space.random_adapted(rng)
    x = space.martingale(z, sigma, space.fock.vacuum())
    q, rec = represent(space, x, sigma)
    err = float(np.max(np.abs(q.q.values - z.values)))
    print(f"round trip: max |z - z_rec| = {err:.3e}, max residual = {rec.max_residual:.3e}")
    bins_list = [int(b) for b in (args.bins or "2,4,8").split(",") if b]
    rows = []
    print(f"{'bins':>5} {'cutoff':>6} {'residual':>14} {'closed_form':>14}")
    for m in bins_list:
        N, r, cf = exp_residual(cfg, m, cfg.cutoff)
        rows.append({"bins": m, "cutoff": N, "residual": r, "closed_form": cf})
        print(f"{m:5d} {N:6d} {r:14.8e} {cf:14.8e}")
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log([r["bins"] for r in rows]), np.log([r["residual"] for r in rows]), 1)[0])
        print(f"log-log slope: {slope:.4f}")
    if args.out:
        _write(json.dumps({"roundtrip_error": err, "residuals": rows}, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args, cfg: Config) -> int:
    values = [int(v) for v in (args.values or "").split(",") if v.strip()]
    seed = cfg.seed if args.seed is None else args.seed
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bins", "cutoff", "quantity", "value"])
    if args.dimension == "bins":
        for m in values:
            N, r, cf = exp_residual(cfg, m, cfg.cutoff)
            w.writerow([m, N, "exp_residual", repr(r)])
            w.writerow([m, N, "exp_residual_closed_form", repr(cf)])
    else:
        sigma = cfg.sigma()
        s = s_omega(sigma)
        for N in values:
            space = AdaptedSpace(cfg.d, cfg.bins, N)
            F = space.fock
            rng = check_rng(seed, "sweep.weyl")
            worst = 0.0
            for _ in range(10):
                u, v = _rc(rng, F.modes), _rc(rng, F.modes)
                u *= cfg.weyl_norm / np.linalg.norm(u)
                v *= cfg.weyl_norm / np.linalg.norm(v)
                d = F.weyl_apply(u, F.coherent(v)) - np.exp(-1j * np.vdot(u, v).imag) * F.coherent(u + v)
                worst = max(worst, float(np.linalg.norm(d)))
            w.writerow([cfg.bins, N, "weyl_action_deviation", repr(worst)])
            rep = space.modular_ito_commutation_check(sigma, s, trials=3, seed=check_rng(seed, "sweep.modular"))
            w.writerow([cfg.bins, N, "modular_ito_deviation", repr(rep.max_deviation)])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "modular": cmd_modular,
    "expect": cmd_expect,
    "martingale": cmd_martingale,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfsc", description="Quasifree stochastic calculus workbench")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML configuration (default: bundled default.toml)")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--seed", type=int, help="override [run] seed")
        if name == "expect":
            sp.add_argument("--word", help='Weyl word, e.g. "W(f)* W(g)"')
        if name == "martingale":
            sp.add_argument("--bins", help="comma-separated bin counts (default 2,4,8)")
        if name == "sweep":
            sp.add_argument("--dimension", choices=["bins", "cutoff"], default="bins")
            sp.add_argument("--values", default="", help="comma-separated values")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"qfsc: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:  # e.g. word syntax or unbound names
        print(f"qfsc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"qfsc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
