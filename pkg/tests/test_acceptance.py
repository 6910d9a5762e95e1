"""Acceptance criteria A1-A9; each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""
import time
import warnings

import numpy as np
import pytest
from scipy import special

from conewedge import (SingularFunction, apply_b_operator, arc_samples, assemble, bg_spectrum_scan, border_family,
                       boundary_spectrum, build_space, conormal_family, csymbol_ray_check, e_recursion, eigenvalues,
                       homogeneity_relation_residual, homogeneity_residual, minimal_growth_sweep,
                       reduction_comparison, relative_index_ladder, theta_inverse, wedge_quotient_basis)
from conewedge.probes import a_tau_convergence, sweep_with_eigenvalues

from conftest import FRIEDRICHS, cl2, pb

RESULTS = {}


def report(capsys, key, ok, detail):
    line = f"{key} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS[key] = line
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert ok, line


def test_a1_boundary_spectrum(capsys):
    t0 = time.perf_counter()
    errs, mults_ok = [], True
    for ell in (0, 1, 2):
        spec = boundary_spectrum(conormal_family(cl2(ell)).layers[0])
        if ell == 0:
            (p,) = spec.points
            errs.append(abs(p.sigma))
            mults_ok &= p.algebraic_multiplicity == 2
        else:
            got = sorted(spec.sigmas, key=lambda s: s.imag)
            errs.append(np.max(np.abs(np.array(got) - [-1j * ell, 1j * ell])))
            mults_ok &= all(p.algebraic_multiplicity == 1 for p in spec.points)
    got = sorted(boundary_spectrum(conormal_family(pb()).layers[0]).sigmas, key=lambda s: s.imag)
    errs.append(np.max(np.abs(np.array(got) - [-0.5j, 0.5j])))
    dt = time.perf_counter() - t0
    err = float(max(errs))
    report(capsys, "A1", err <= 1e-10 and mults_ok and dt < 1.0,
           f"max root error {err:.2e} (<= 1e-10), multiplicities {'ok' if mults_ok else 'wrong'}, {dt:.3f}s (< 1s)")


def test_a2_theta_recursion(capsys):
    t0 = time.perf_counter()
    fam = conormal_family(pb())
    spec = boundary_spectrum(fam.layers[0])
    psi = SingularFunction.monomial(0.5j, [1.0])
    want = SingularFunction.build(1, [(0.5j, [[1.0]]), (-0.5j, [[-1.0], [1.0]])])
    coef_err = (theta_inverse(psi, fam, spec) - want).norm_inf()
    ident = 0.0
    for problem in (pb(), cl2(0)):
        f = conormal_family(problem)
        s = boundary_spectrum(f.layers[0])
        for u in wedge_quotient_basis(s, 2).elements():
            exp = e_recursion(u, f, s)
            img = apply_b_operator(f, exp.total())
            ident = max(ident, *(img.restrict(exp.sigma0 - 1j * v).norm_inf() for v in range(exp.N_sigma0 + 1)))
    dt = time.perf_counter() - t0
    report(capsys, "A2", coef_err <= 1e-10 and ident <= 1e-10 and dt < 1.0,
           f"coefficient error {coef_err:.2e}, defining identity residual {ident:.2e} (<= 1e-10), {dt:.3f}s (< 1s)")


def test_a3_homogeneity(capsys):
    space = build_space(20.0, 512, 2)
    worst = 0.0
    for steps in (1, 8, 64):
        rho = float(np.exp(steps * space.h))
        for problem in (cl2(0), pb()):
            for lam in (-1.0, 3.0 + 2.0j):
                worst = max(worst, homogeneity_residual(problem, space, rho, lam))
    report(capsys, "A3", worst <= 1e-12, f"relative residual {worst:.2e} on the overlap interior (<= 1e-12)")


def test_a4_index_ladder(capsys):
    got = {}
    for G in (256, 512):
        space = build_space(20.0, G, 2)
        for name, problem in (("cl2_l0", cl2(0)), ("pb", pb())):
            got[(name, G)] = relative_index_ladder(problem, space=space).indices
    ok = all(v == (-1, 0, 1) for v in got.values())
    detail = ", ".join(f"{n}@G={G}: {v}" for (n, G), v in got.items())
    report(capsys, "A4", ok, detail)


def test_a5_friedrichs_and_growth(capsys):
    t0 = time.perf_counter()
    space = build_space(20.0, 512, 2)
    lam0 = float(np.sort(eigenvalues(assemble(cl2(0), space, FRIEDRICHS), 1).real)[0])
    exact = special.jn_zeros(0, 1)[0] ** 2
    rel = abs(lam0 - exact) / exact
    rep = minimal_growth_sweep(cl2(0), FRIEDRICHS, np.pi, 1.0, 1e4, 40, space)
    dt = time.perf_counter() - t0
    ok = rel <= 0.01 and abs(rep.fitted_exponent + 1) <= 0.1 and dt < 120
    report(capsys, "A5", ok, f"lowest eigenvalue {lam0:.5f} vs {exact:.5f} (rel {rel:.1e}, <= 1%), "
                             f"growth exponent {rep.fitted_exponent:.4f} (-1 +- 0.1), {dt:.1f}s (< 120s)")


def test_a6_a_tau_convergence(capsys):
    taus = np.logspace(-3, -1, 7)
    exps = {G: a_tau_convergence(pb(), taus, 8, build_space(20.0, G, 2)).exponent for G in (512, 1024)}
    e1, e2 = exps[512], exps[1024]
    stable = abs(e2 - e1) <= 0.1 * abs(e1)
    report(capsys, "A6", e1 >= 0.9 and e2 >= 0.9 and stable,
           f"exponent {e1:.4f} at G=512, {e2:.4f} at G=1024 (>= 0.9, change <= 10%)")


def test_a7_bordering(capsys):
    space = build_space(20.0, 512, 2)
    bf = border_family(cl2(0), space, arc_samples(np.pi, np.pi / 2, 33))
    res = max(homogeneity_relation_residual(bf, bf.arc[i] * r, steps)
              for i in (0, 16, 32) for r in (1.0, 40.0) for steps in (1, 8, 64))
    ok = len(bf.conds) == 33 and bf.conds.max() < 1e8 and res <= 1e-10
    report(capsys, "A7", ok, f"{len(bf.conds)} arc samples, max condition {bf.conds.max():.3e} (< 1e8), "
                             f"extension relation residual {res:.2e} (<= 1e-10)")


def test_a8_reduction(capsys):
    space = build_space(20.0, 512, 2)
    lams = sweep_with_eigenvalues(cl2(0), FRIEDRICHS, 0.0, 1.0, 100.0, 40, space)
    rc = reduction_comparison(cl2(0), FRIEDRICHS, lams, space)
    ok = rc.spearman >= 0.95 and rc.same_flags and len(lams) == 40
    report(capsys, "A8", ok, f"Spearman {rc.spearman:.4f} (>= 0.95) over {len(lams)} samples, flagged by det F "
                             f"{list(rc.flagged_F)}, by smallest singular value {list(rc.flagged_direct)}")


def test_a9_ray_conditions(capsys):
    left = csymbol_ray_check(cl2(0), np.pi, np.pi / 2)
    right = csymbol_ray_check(cl2(0), 0.0, np.pi / 2)
    angles = np.deg2rad([135, 180, 225, 0])
    sc = bg_spectrum_scan(cl2(0), angles, [400.0, 1200.0, 4000.0])
    good = all(l == "injective-and-surjective" for l in sc.ray_labels[:3])
    flagged = sc.ray_labels[3] != "injective-and-surjective"
    ok = left.ok and not right.ok and good and flagged
    report(capsys, "A9", ok, f"symbol check about R- {'empty' if left.ok else 'violated'}, about R+ "
                             f"{len(right.violations)} violations; scan labels {list(sc.ray_labels)}")


if __name__ == "__main__":
    warnings.simplefilter("ignore")
    failed = 0
    for fn in (test_a1_boundary_spectrum, test_a2_theta_recursion, test_a3_homogeneity, test_a4_index_ladder,
               test_a5_friedrichs_and_growth, test_a6_a_tau_convergence, test_a7_bordering, test_a8_reduction,
               test_a9_ray_conditions):
        try:
            fn(None)
        except AssertionError:
            failed += 1
    raise SystemExit(1 if failed else 0)
