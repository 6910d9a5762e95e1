import json
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conewedge import (NonSimpleDomain, SingularFunction, apply_b_operator, boundary_spectrum, conormal_family,
                       mellin_singular_part, quotient_dimension, singular_from_principal_part, strip_sigma,
                       wedge_quotient_basis)
from conewedge.discrete import fd_weights
from conewedge.singular import log_binomial_shift

from conftest import cl2, pb, sys2x2

coeff = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def spectrum(problem):
    return boundary_spectrum(conormal_family(problem).layers[0])


# ---- strip and bases


def test_strip_cl2_l0():
    assert np.allclose(strip_sigma(spectrum(cl2(0)), 2), [0])


def test_strip_cl2_l1_empty_with_flag():
    with pytest.warns(UserWarning, match="Dmin-nonsimple"):
        assert strip_sigma(spectrum(cl2(1)), 2) == []
    with pytest.raises(NonSimpleDomain):
        wedge_quotient_basis(spectrum(cl2(1)), 2)


def test_strip_pb():
    assert sorted(strip_sigma(spectrum(pb()), 2), key=lambda s: s.imag) == pytest.approx([-0.5j, 0.5j], abs=1e-10)


def test_cl2_l0_basis_is_one_and_log():
    qb = wedge_quotient_basis(spectrum(cl2(0)), 2)
    els = qb.elements()
    assert qb.total_dim == 2
    assert any(e.close_to(SingularFunction.monomial(0, [1.0])) for e in els)
    logs = [e for e in els if e.log_degree() == 1]
    assert len(logs) == 1
    # solutions of (x dx)^2 u = 0: the log part must be a pure log x up to a constant
    assert abs(logs[0].terms[0][1][1, 0]) > 0


def test_basis_elements_are_annihilated():
    for problem in (cl2(0), pb(), sys2x2()):
        fam = conormal_family(problem)
        for u in wedge_quotient_basis(spectrum(problem), 2).elements():
            assert apply_b_operator({0: fam.layers[0]}, u).is_zero(1e-10)


def test_pb_basis_exponents():
    qb = wedge_quotient_basis(spectrum(pb()), 2)
    x = np.array([0.3, 0.7])
    vals = sorted((u(x)[:, 0] / u(x)[0, 0]).real.tolist() for u in qb.elements())
    # x^{-1/2} and x^{1/2}, normalized at x=0.3
    assert np.allclose(vals[0], [1, (0.7 / 0.3) ** -0.5])
    assert np.allclose(vals[1], [1, (0.7 / 0.3) ** 0.5])


@pytest.mark.parametrize("problem,d", [(cl2(0), 2), (pb(), 2), (cl2(2), 0), (sys2x2(), 4)])
def test_quotient_dimension(problem, d):
    assert quotient_dimension(spectrum(problem), 2) == d


# ---- Mellin dictionary


@settings(max_examples=30, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=4), st.floats(-0.9, 0.9), st.floats(-1, 1))
def test_principal_part_round_trip(cs, im, re):
    sigma = complex(re, im)
    sf = SingularFunction.build(1, [(sigma, np.array(cs).reshape(-1, 1))])
    back = singular_from_principal_part(mellin_singular_part(sf, sigma), 1)
    assert back.close_to(sf, 1e-12)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_principal_part_against_quadrature(k):
    # M[1_(0,1) log^k x x^{i s1}](s) has no holomorphic part; compare at a test point
    s1 = 0.3 + 0.2j
    s = -0.4 + 1.7j  # Im(s1 - s) < 0 gives decay of x^{i(s1 - s)} at x -> 0
    f = lambda t: np.exp(1j * (s1 - s) * t) * t**k
    re = integrate.quad(lambda t: f(t).real, -80, 0, limit=400)[0]
    im = integrate.quad(lambda t: f(t).imag, -80, 0, limit=400)[0]
    pp = mellin_singular_part(SingularFunction.monomial(s1, [1.0], k), s1)
    val = sum(pp.coeff(-n)[0] * (s - s1) ** (-n) for n in range(1, pp.pole_order + 1))
    assert abs(val - (re + 1j * im)) <= 1e-8 * max(1, abs(val))
    assert abs(pp.coeff(-(k + 1))[0] - (-1) ** k * factorial(k) * 1j ** (k + 1)) <= 1e-14


# ---- exact action


@settings(max_examples=25, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=3), st.lists(coeff, min_size=1, max_size=3),
       st.floats(-0.9, 0.9))
def test_apply_b_operator_matches_pointwise(cs, poly, im):
    sigma = complex(0.1, im)
    sf = SingularFunction.build(1, [(sigma, np.array(cs).reshape(-1, 1))])
    P = np.array(poly).reshape(-1, 1, 1)
    got = apply_b_operator({0: P}, sf)
    # pointwise oracle: (x D_x)^k by high-order finite differences in t = log x
    t0 = np.array([-1.3, -0.4])
    h = 1e-3
    offs = np.arange(-4, 5)
    vals = np.array([sf(np.exp(t0 + o * h))[:, 0] for o in offs])  # (9, 2)
    derivs = [vals[4]]
    for q in range(1, len(poly)):
        w = fd_weights(offs, q, h)
        derivs.append((-1j) ** q * (w @ vals))
    want = sum(poly[q] * derivs[q] for q in range(len(poly)))
    assert np.allclose(got(np.exp(t0))[:, 0], want, rtol=1e-5, atol=1e-5 * max(1, np.max(np.abs(want))))


def test_apply_b_operator_layer_shifts_exponent():
    sf = SingularFunction.monomial(0.5j, [1.0])
    out = apply_b_operator({1: np.array([[[2.0]]])}, sf)
    assert out.close_to(SingularFunction.monomial(-0.5j, [2.0]))


@settings(max_examples=25, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=4), st.floats(-3, 3))
def test_log_binomial_shift(cs, a):
    c = np.array(cs).reshape(-1, 1)
    shifted = log_binomial_shift(c, a)
    L = np.array([-0.7, 0.2, 1.1])
    lhs = sum(shifted[k, 0] * L**k for k in range(len(cs)))
    rhs = sum(c[k, 0] * (L + a) ** k for k in range(len(cs)))
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * max(1.0, np.max(np.abs(rhs))))


# ---- algebra and serialization


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([0j, 0.5j, -0.5j, 0.3 + 0.1j]), st.lists(coeff, min_size=2, max_size=2),
                          st.integers(0, 2)), min_size=0, max_size=4))
def test_json_round_trip(items):
    sf = SingularFunction.zero(2)
    for s, v, k in items:
        sf = sf + SingularFunction.monomial(s, v, k)
    back = SingularFunction.from_json(json.loads(json.dumps(sf.to_json())), 2)
    assert back.close_to(sf, 0.0)


def test_addition_merges_and_cancels():
    a = SingularFunction.monomial(0.5j, [1.0], 1)
    assert (a - a).is_zero()
    assert len((a + SingularFunction.monomial(0.5j, [2.0])).terms) == 1


def test_pointwise_values():
    sf = SingularFunction.build(1, [(0.5j, [[1.0], [2.0]])])  # (1 + 2 log x) x^{-1/2}
    x = np.array([0.25, 0.5])
    assert np.allclose(sf(x)[:, 0], (1 + 2 * np.log(x)) * x**-0.5)
