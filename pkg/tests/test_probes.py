import numpy as np
import pytest
from scipy import special

from conewedge import (ConeProblem, a_tau_convergence, assemble, bg_spectrum_scan, csymbol_ray_check, eigenvalues,
                       f_vs_fwedge, ktilde_estimates, minimal_growth_sweep, relative_index_ladder)
from conewedge.probes import fit_exponent, in_sector, sweep_with_eigenvalues

from conftest import FRIEDRICHS, ExtensionSpec, cl2, pb, sys2x2


def test_fit_exponent_top_decade():
    r = np.logspace(0, 4, 30)
    y = 3 * r**-1.0 * (1 + 5 / r)  # lower-order correction only matters at small r
    assert fit_exponent(r, y) == pytest.approx(-1.0, abs=2e-3)


def test_in_sector():
    assert in_sector(-1.0, np.pi, np.pi / 2)
    assert not in_sector(1.0, np.pi, np.pi / 2)
    assert in_sector(np.exp(1j * 0.78), 0.0, np.pi / 2)
    assert not in_sector(0.0, 0.0, np.pi)


# ---- symbol conditions


def test_csymbol_cl2():
    assert csymbol_ray_check(cl2(0), np.pi, np.pi / 2).ok
    rep = csymbol_ray_check(cl2(0), 0.0, np.pi / 2)
    assert not rep.ok
    assert np.allclose([v[2] for v in rep.violations], 1.0)


def test_csymbol_x_dependent_leading_coefficient():
    # a_2(x) = 1 - 1.5 x turns negative near x = 1
    p = ConeProblem(2, 1, {2: [1.0, -1.5]}, 2)
    assert not csymbol_ray_check(p, np.pi, np.pi / 4).ok
    assert csymbol_ray_check(sys2x2(), np.pi, np.pi / 2).ok


# ---- background spectrum


def test_bg_scan_classifies_half_lines(space256):
    sc = bg_spectrum_scan(cl2(0), [np.pi, 0.0], [400.0, 1200.0, 4000.0], space256)
    assert sc.ray_labels[0] == "injective-and-surjective"
    assert sc.ray_labels[1] == "deficient"
    assert all(sc.radially_consistent)
    for c in sc.cells[0]:
        assert min(c.s_inj, c.s_surj) / abs(c.lam) == pytest.approx(1.0, abs=0.05)


# ---- resolvent sweeps


def test_sweep_inverse_distance_for_self_adjoint(space256):
    # |lambda| kept in the range the 256-point grid resolves; beyond it the one-sided
    # closures make the discrete operator visibly non-normal
    rep = minimal_growth_sweep(cl2(0), FRIEDRICHS, np.pi / 2, 1.0, 300.0, 10, space256)
    ev = eigenvalues(assemble(cl2(0), space256, FRIEDRICHS), 40)
    for s in rep.samples:
        dist = np.min(np.abs(ev - s.lam))
        assert 0.9 <= s.inv_norm * dist <= 1.1


def test_sweep_excludes_eigenvalues(space256):
    lams = sweep_with_eigenvalues(cl2(0), FRIEDRICHS, 0.0, 1.0, 100.0, 12, space256)
    rep = minimal_growth_sweep(cl2(0), FRIEDRICHS, 0.0, 1.0, 100.0, 12, space256, strategy="covering", lams=lams)
    assert len(rep.samples) + len(rep.excluded) == 12
    assert len(rep.excluded) == 3
    bad = sorted(abs(l) for l, _ in rep.excluded)
    assert np.allclose(bad, special.jn_zeros(0, 3) ** 2, rtol=1e-2)


def test_sweep_is_deterministic(space256):
    a = minimal_growth_sweep(cl2(0), FRIEDRICHS, np.pi, 1.0, 1e3, 8, space256)
    b = minimal_growth_sweep(cl2(0), FRIEDRICHS, np.pi, 1.0, 1e3, 8, space256)
    assert a.rows() == b.rows()


# ---- model comparison


def test_f_vs_fwedge_vanishes_for_constant_coefficients(space256):
    rep = f_vs_fwedge(cl2(0), FRIEDRICHS, np.pi, 10.0, 1e3, 4, space256)
    assert np.all(rep.diffs < 1e-8)


def test_f_vs_fwedge_decays_for_pb(space256):
    from conewedge.probes import quotient_functions
    u = [q for q in quotient_functions(pb()) if len(q.terms) > 1][0]
    rep = f_vs_fwedge(pb(), ExtensionSpec("span", (u,)), np.pi, 10.0, 1e3, 4, space256)
    assert np.all(np.diff(rep.diffs) < 0)
    assert rep.exponent < 0


def test_ktilde_constant_coefficient(space256):
    rep = ktilde_estimates(cl2(0), FRIEDRICHS, np.logspace(0, 2, 5), space256)
    assert rep.l2_exponent == pytest.approx(0.0, abs=0.05)
    assert rep.graph_exponent == pytest.approx(2.0, abs=0.1)


def test_ktilde_pb_exponents_close_to_model(space256):
    from conewedge.probes import quotient_functions
    u = [q for q in quotient_functions(pb()) if len(q.terms) > 1][0]
    rep = ktilde_estimates(pb(), ExtensionSpec("span", (u,)), np.logspace(1, 2, 5), space256)
    assert rep.l2_exponent == pytest.approx(0.0, abs=0.2)
    assert rep.graph_exponent == pytest.approx(2.0, abs=0.2)


# ---- A_tau and index ladder


def test_a_tau_constant_coefficient_is_zero(space256):
    rep = a_tau_convergence(cl2(0), [1e-3, 1e-2, 1e-1], 4, space256)
    assert np.all(rep.sup_ratio == 0)
    assert np.all(rep.probe_ratio == 0)


def test_a_tau_bound_linear_in_tau(space256):
    taus = np.logspace(-3, -1, 5)
    rep = a_tau_convergence(pb(), taus, 4, space256)
    assert rep.exponent >= 0.9
    assert np.all(rep.sup_ratio <= 1.0 * taus)  # sup of |b| x omega_tau is at most b tau


def test_a_tau_seed_reproducible(space256):
    a = a_tau_convergence(pb(), [1e-2, 1e-1], 4, space256, seed=5)
    b = a_tau_convergence(pb(), [1e-2, 1e-1], 4, space256, seed=5)
    assert np.array_equal(a.probe_ratio, b.probe_ratio)


@pytest.mark.parametrize("problem", [cl2(0), pb()])
def test_index_ladder(space256, problem):
    L = relative_index_ladder(problem, space=space256)
    assert L.indices == (-1, 0, 1)
    assert L.holds
