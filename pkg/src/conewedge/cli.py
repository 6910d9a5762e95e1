"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
Angles are given in degrees; complex numbers in files are ``[re, im]`` pairs.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

import numpy as np

from .border import IndexJump
from .discrete import MINIMAL, DiscretizationError, DminNonsimple, build_space
from .io import RunConfig, ValidationError, load_extension, validate_problem, write_json, write_sweep_csv
from .mellin import LaurentVerificationFailed, NotConeElliptic, boundary_spectrum, conormal_family
from .probes import a_tau_convergence, bg_spectrum_scan, csymbol_ray_check, f_vs_fwedge, ktilde_estimates, \
    minimal_growth_sweep, quotient_functions, relative_index_ladder, smax_condition_check
from .singular import EXP_TOL, NonSimpleDomain, boundary_line_points, quotient_dimension, strip_sigma, wedge_quotient_basis
from .theta import AmbiguousAttribution, e_recursion

log = logging.getLogger("conewedge")

NUMERICAL = (DiscretizationError, IndexJump, LaurentVerificationFailed, np.linalg.LinAlgError)
# properties of the input problem rather than of the computation
UNSUITABLE = (ValidationError, NotConeElliptic, NonSimpleDomain, DminNonsimple, AmbiguousAttribution,
              FileNotFoundError, IsADirectoryError)


class NumericalFailure(RuntimeError):
    pass


def fmt_c(z: complex, digits: int = 10) -> str:
    z = complex(z)
    re = 0.0 if abs(z.real) < 10.0**-digits else z.real
    im = 0.0 if abs(z.imag) < 10.0**-digits else z.imag
    return f"{re:.{digits}g}{im:+.{digits}g}i"


def fmt_vec(v) -> str:
    return "[" + ", ".join(fmt_c(z, 8) for z in np.ravel(v)) + "]"


def singular_table(sf) -> list:
    rows = []
    for s, c in sf.terms:
        for k, v in enumerate(c):
            if np.any(np.abs(v) > 1e-13):
                rows.append(f"  x^(i*({fmt_c(s, 8)}))  log^{k}  {fmt_vec(v)}")
    return rows or ["  0"]


# --------------------------------------------------------------------------
# commands


def cmd_spec_b(cfg, problem, args, out):
    fam = conormal_family(problem)
    spec = boundary_spectrum(fam.layers[0], tol=cfg.cluster_tol)
    strip = strip_sigma(spec, problem.m)
    print(f"{'root':>26}  {'mult':>4}  {'partial':>8}  in-strip", file=out)
    for p in spec.points:
        inside = any(abs(p.sigma - s) <= EXP_TOL * max(1.0, abs(s)) for s in strip)
        if args.strip and not inside:
            continue
        part = ",".join(str(q) for q in p.partial_multiplicities)
        print(f"{fmt_c(p.sigma):>26}  {p.algebraic_multiplicity:>4}  {part:>8}  {'yes' if inside else 'no'}",
              file=out)
    try:
        print(f"d={quotient_dimension(spec, problem.m)}", file=out)
    except NonSimpleDomain:
        lines = ", ".join(fmt_c(s) for s in boundary_line_points(spec, problem.m))
        print(f"d=undefined (Dmin-nonsimple: roots on the strip boundary at {lines})", file=out)
    for w in spec.warnings:
        print(f"warning: {w}", file=out)


def cmd_domains(cfg, problem, args, out):
    fam = conormal_family(problem)
    spec = boundary_spectrum(fam.layers[0], tol=cfg.cluster_tol)
    model = wedge_quotient_basis(spec, problem.m).elements()
    full = quotient_functions(problem)
    print(f"d={len(model)}", file=out)
    for i, (u, v) in enumerate(zip(model, full)):
        print(f"[{i}] model cone:", file=out)
        print("\n".join(singular_table(u)), file=out)
        print(f"[{i}] operator:", file=out)
        print("\n".join(singular_table(v)), file=out)


def parse_sigma(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise ValidationError([f"--sigma: expected 're,im', got {text!r}"])
    if len(parts) != 2:
        raise ValidationError([f"--sigma: expected 're,im', got {text!r}"])
    return complex(parts[0], parts[1])


def cmd_theta(cfg, problem, args, out):
    fam = conormal_family(problem)
    spec = boundary_spectrum(fam.layers[0], tol=cfg.cluster_tol)
    qb = wedge_quotient_basis(spec, problem.m)
    groups = qb.sigma_groups
    if args.sigma is not None:
        s0 = parse_sigma(args.sigma)
        g = qb.group(s0)
        if not g:
            raise ValidationError([f"--sigma {fmt_c(s0)} is not a boundary-spectrum point in the strip"])
        groups = [(s0, g)]
    for s0, g in groups:
        for psi in g:
            exp = e_recursion(psi, fam, spec)
            print(f"sigma0={fmt_c(s0)}  N(sigma0)={exp.N_sigma0}", file=out)
            print(f"  {'term':>6}  {'exponent':>20}  log-degree  coefficients", file=out)
            for v, e in enumerate(exp.e_list):
                for s, c in e.terms:
                    print(f"  {'e' + str(v):>6}  {fmt_c(s, 8):>20}  {len(c) - 1:>10}  "
                          + " ".join(fmt_vec(row) for row in c), file=out)
            print("  theta^-1 psi =", file=out)
            print("\n".join(singular_table(exp.total())), file=out)


def cmd_index_ladder(cfg, problem, args, out):
    L = relative_index_ladder(problem, space=build_space(cfg.T, cfg.G, problem.m))
    print(f"{'k':>3}  {'ker':>4}  {'coker':>5}  {'index':>5}", file=out)
    for r in L.rows:
        flag = "  ill-separated" if r.ill_separated else ""
        print(f"{r.k:>3}  {r.dim_ker:>4}  {r.dim_coker:>5}  {r.index:>5}{flag}", file=out)
    print(f"d={L.d} ladder={'holds' if L.holds else 'broken'}", file=out)
    if any(r.ill_separated for r in L.rows):
        raise NumericalFailure("rank decision ill-separated; refine the grid")


def _extension(cfg, problem):
    if cfg.extension_path is None:
        return MINIMAL
    return load_extension(cfg.extension_path, problem.N)


def _emit_sweep(cfg, rep, out, extra=None):
    meta = {"config": cfg.to_json(), "theta0_rad": rep.theta0, "fitted_exponent": rep.fitted_exponent,
            "fit_window": "top decade of |lambda|", "threshold_R": rep.threshold_R,
            "requested_samples": cfg.samples, "rows": len(rep.samples),
            "excluded": [{"lambda": lam, "reason": why} for lam, why in rep.excluded]}
    meta.update(extra or {})
    if cfg.output:
        write_sweep_csv(cfg.output, rep.rows())
        write_json(cfg.output + ".json", meta)
    else:
        write_sweep_csv(out, rep.rows())
    print(f"fitted_exponent={rep.fitted_exponent:.6g}", file=out)
    print(f"excluded={len(rep.excluded)} threshold_R={rep.threshold_R:.6g}", file=out)


def cmd_sweep(cfg, problem, args, out):
    D = _extension(cfg, problem)
    space = build_space(cfg.T, cfg.G, problem.m)
    rep = minimal_growth_sweep(problem, D, cfg.theta0, cfg.r_min, cfg.r_max, cfg.samples, space,
                               strategy=args.strategy)
    _emit_sweep(cfg, rep, out)


def cmd_sector_scan(cfg, problem, args, out):
    half = cfg.aperture / 2
    angles = cfg.theta0 + np.linspace(-half, half, args.angles)
    radii = np.logspace(np.log10(cfg.r_min), np.log10(cfg.r_max), args.radii)
    sc = bg_spectrum_scan(problem, angles, radii, build_space(cfg.T, cfg.G, problem.m))
    print(f"{'angle_deg':>10}  {'label':>26}  consistent  min s/|lambda|", file=out)
    for a, lab, ok, row in zip(angles, sc.ray_labels, sc.radially_consistent, sc.cells):
        worst = min(min(c.s_inj, c.s_surj) / abs(c.lam) for c in row)
        print(f"{np.rad2deg(a) % 360:>10.4g}  {lab:>26}  {'yes' if ok else 'no':>10}  {worst:.4g}", file=out)
    if cfg.output:
        write_json(cfg.output, {"config": cfg.to_json(), "thresholds": sc.thresholds,
                                "cells": [[{"lambda": c.lam, "s_inj": c.s_inj, "s_surj": c.s_surj,
                                            "label": c.label} for c in row] for row in sc.cells]})


def cmd_csym_check(cfg, problem, args, out):
    rep = csymbol_ray_check(problem, cfg.theta0, cfg.aperture, args.points)
    if rep.ok:
        print("ok: symbol eigenvalues avoid the closed sector", file=out)
    else:
        x, xi, e = rep.violations[0]
        print(f"violation: {len(rep.violations)} eigenvalues in the sector, first at x={x:.4g} xi={xi:+g} "
              f"eigenvalue {fmt_c(e, 6)}", file=out)


def cmd_atau_check(cfg, problem, args, out):
    taus = np.logspace(np.log10(args.tau_min), np.log10(args.tau_max), args.taus)
    rep = a_tau_convergence(problem, taus, args.probes, build_space(cfg.T, cfg.G, problem.m), cfg.seed)
    print(f"{'tau':>10}  {'sup':>12}  {'probe':>12}", file=out)
    for t, s, p in zip(taus, rep.sup_ratio, rep.probe_ratio):
        print(f"{t:>10.4g}  {s:>12.6g}  {p:>12.6g}", file=out)
    print(f"exponent={rep.exponent:.6g} probe_exponent={rep.probe_exponent:.6g}", file=out)
    if cfg.output:
        write_json(cfg.output, {"config": cfg.to_json(), "taus": taus, "sup": rep.sup_ratio,
                                "probe": rep.probe_ratio, "exponent": rep.exponent,
                                "probe_exponent": rep.probe_exponent})


def _series_table(out, label, xs, ys, exponent):
    print(f"{label:>12}  {'value':>14}", file=out)
    for x, y in zip(xs, ys):
        print(f"{abs(x):>12.6g}  {y:>14.6g}", file=out)
    print(f"exponent={exponent:.6g}", file=out)


def cmd_smax_check(cfg, problem, args, out):
    D = _extension(cfg, problem)
    rep = smax_condition_check(problem, D, cfg.theta0, cfg.r_min, cfg.r_max, cfg.samples,
                               build_space(cfg.T, cfg.G, problem.m))
    _series_table(out, "|lambda|", rep.lams, rep.q_norms, rep.q_exponent)
    print(f"resolvent_exponent={rep.inv_exponent:.6g} excluded={len(rep.excluded)}", file=out)


def cmd_ffwedge_check(cfg, problem, args, out):
    D = _extension(cfg, problem)
    rep = f_vs_fwedge(problem, D, cfg.theta0, cfg.r_min, cfg.r_max, cfg.samples,
                      build_space(cfg.T, cfg.G, problem.m))
    _series_table(out, "|lambda|", rep.lams, rep.diffs, rep.exponent)


def cmd_ktilde_check(cfg, problem, args, out):
    D = _extension(cfg, problem)
    rhos = np.logspace(np.log10(cfg.r_min), np.log10(cfg.r_max), cfg.samples)
    rep = ktilde_estimates(problem, D, rhos, build_space(cfg.T, cfg.G, problem.m))
    print(f"{'rho':>10}  {'L2':>12}  {'graph':>12}", file=out)
    for r, a, b in zip(rhos, rep.l2, rep.graph):
        print(f"{r:>10.4g}  {a:>12.6g}  {b:>12.6g}", file=out)
    print(f"l2_exponent={rep.l2_exponent:.6g} graph_exponent={rep.graph_exponent:.6g}", file=out)


COMMANDS = {
    "spec-b": cmd_spec_b,
    "domains": cmd_domains,
    "theta": cmd_theta,
    "index-ladder": cmd_index_ladder,
    "sweep": cmd_sweep,
    "sector-scan": cmd_sector_scan,
    "csym-check": cmd_csym_check,
    "atau-check": cmd_atau_check,
    "smax-check": cmd_smax_check,
    "ffwedge-check": cmd_ffwedge_check,
    "ktilde-check": cmd_ktilde_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem JSON file")
    common.add_argument("--T", type=float, default=20.0, help="log-grid length")
    common.add_argument("--G", type=int, default=512, help="grid points")
    common.add_argument("--tol", type=float, default=1e-8, help="root clustering tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (CSV or JSON)")
    common.add_argument("-v", "--verbose", action="store_true")

    ray = argparse.ArgumentParser(add_help=False)
    ray.add_argument("--ext", default=None, help="extension JSON file")
    ray.add_argument("--ray", type=float, default=180.0, help="ray angle in degrees")
    ray.add_argument("--aperture", type=float, default=90.0, help="sector aperture in degrees")
    ray.add_argument("--rmin", type=float, default=1.0)
    ray.add_argument("--rmax", type=float, default=1e4)
    ray.add_argument("--samples", type=int, default=40)

    p = argparse.ArgumentParser(prog="conewedge", description="Cone operators and their model wedge.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("spec-b", parents=[common], help="boundary spectrum")
    s.add_argument("--strip", action="store_true", help="only points in the strip")
    sub.add_parser("domains", parents=[common], help="bases of the domain quotients")
    s = sub.add_parser("theta", parents=[common], help="theta^-1 expansion")
    s.add_argument("--sigma", default=None, help="exponent as 're,im'")
    sub.add_parser("index-ladder", parents=[common], help="relative index across extensions")
    s = sub.add_parser("sweep", parents=[common, ray], help="resolvent growth along a ray")
    s.add_argument("--strategy", choices=("auto", "bumps", "covering"), default="auto")
    s = sub.add_parser("sector-scan", parents=[common, ray], help="background spectrum scan")
    s.add_argument("--angles", type=int, default=9)
    s.add_argument("--radii", type=int, default=3)
    s = sub.add_parser("csym-check", parents=[common, ray], help="principal symbol sector check")
    s.add_argument("--points", type=int, default=64)
    s = sub.add_parser("atau-check", parents=[common, ray], help="A_tau convergence")
    s.add_argument("--tau-min", type=float, default=1e-3)
    s.add_argument("--tau-max", type=float, default=1e-1)
    s.add_argument("--taus", type=int, default=7)
    s.add_argument("--probes", type=int, default=16)
    sub.add_parser("smax-check", parents=[common, ray], help="model coefficient map decay")
    sub.add_parser("ffwedge-check", parents=[common, ray], help="F versus F_wedge")
    sub.add_parser("ktilde-check", parents=[common, ray], help="Ktilde(rho) growth; --rmin/--rmax bound rho")
    return p


def _config(args) -> RunConfig:
    g = getattr
    return RunConfig(
        command=args.command, problem_path=args.problem, extension_path=g(args, "ext", None),
        theta0_deg=g(args, "ray", 180.0), aperture_deg=g(args, "aperture", 90.0),
        r_min=g(args, "rmin", 1.0), r_max=g(args, "rmax", 1e4), samples=g(args, "samples", 40),
        T=args.T, G=args.G, cluster_tol=args.tol, output=args.out, seed=args.seed)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    np.random.seed(args.seed)
    try:
        cfg = _config(args)
        problem = validate_problem(cfg.problem_path)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            COMMANDS[args.command](cfg, problem, args, out)
        for w in {str(w.message) for w in caught}:
            log.warning("%s", w)
    except UNSUITABLE as exc:
        errs = getattr(exc, "errors", None) or [str(exc)]
        for e in errs:
            print(f"error: {e}", file=sys.stderr)
        return 2
    except (NumericalFailure, *NUMERICAL) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
