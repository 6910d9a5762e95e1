import numpy as np
import pytest
from scipy import special

from conewedge import (MINIMAL, SpectrumHit, arc_samples, assemble, border_family, eigenvalues,
                       homogeneity_relation_residual, ker_coker, reduce_to_boundary, resolvent)
from conewedge.discrete import solve_operator

from conftest import FRIEDRICHS, LOGX, ExtensionSpec, cl2


@pytest.fixture(scope="module")
def bf_left(space256):
    return border_family(cl2(0), space256, arc_samples(np.pi, np.pi / 2, 33))


@pytest.fixture(scope="module")
def bf_positive(space256):
    return border_family(cl2(0), space256, arc_samples(0.0, np.pi / 2, 17), strategy="covering")


def test_arc_samples():
    arc = arc_samples(np.pi, np.pi / 2, 33)
    assert len(arc) == 33
    assert np.allclose(np.abs(arc), 1)
    assert np.allclose(np.angle(arc[[0, -1]] * -1), [-np.pi / 4, np.pi / 4])


def test_bordering_invertible_on_arc(bf_left):
    assert bf_left.d2 == 1
    assert np.all(np.isfinite(bf_left.conds))
    assert bf_left.conds.max() < 1e8


def test_cokernel_dimension_matches_minimal_family(space256, bf_left):
    op = assemble(cl2(0), space256, MINIMAL, -1.0, "wedge")
    assert ker_coker(op).dim_coker == bf_left.d2


@pytest.mark.parametrize("steps", [1, 8, 64])
def test_homogeneous_extension_relation(bf_left, steps):
    for lam in (bf_left.arc[0] * 4.0, bf_left.arc[16] * 50.0):
        assert homogeneity_relation_residual(bf_left, lam, steps) <= 1e-10


def test_bordered_resolvent_matches_direct(space256, bf_left):
    lam = -37.0
    R, Pi, red = resolvent(cl2(0), FRIEDRICHS, bf_left, lam)
    direct = solve_operator(assemble(cl2(0), space256, FRIEDRICHS), lam)
    assert np.linalg.norm(R - direct, 2) <= 1e-8 * np.linalg.norm(direct, 2)
    assert np.linalg.norm(Pi @ Pi - Pi) <= 1e-10


def test_resolvent_norm_inverse_distance(bf_left):
    lam0 = special.jn_zeros(0, 1)[0] ** 2
    for r in (10.0, 300.0):
        R, _, _ = resolvent(cl2(0), FRIEDRICHS, bf_left, -r)
        assert np.linalg.norm(R, 2) * (r + lam0) == pytest.approx(1.0, abs=2e-2)


def test_spectrum_hit_at_eigenvalue(space256, bf_positive):
    lam = eigenvalues(assemble(cl2(0), space256, FRIEDRICHS), 1)[0].real
    with pytest.raises(SpectrumHit):
        resolvent(cl2(0), FRIEDRICHS, bf_positive, lam)


def test_f_switches_with_extension(space256, bf_positive):
    # an eigenvalue of the Friedrichs extension is not one of the log-extension
    lam = eigenvalues(assemble(cl2(0), space256, FRIEDRICHS), 1)[0].real
    f_own = abs(np.linalg.det(reduce_to_boundary(cl2(0), FRIEDRICHS, bf_positive, lam).F))
    f_other = abs(np.linalg.det(reduce_to_boundary(cl2(0), ExtensionSpec("span", (LOGX,)), bf_positive, lam).F))
    f_ref = abs(np.linalg.det(reduce_to_boundary(cl2(0), FRIEDRICHS, bf_positive, lam * 1.3).F))
    assert f_own <= 1e-8 * f_ref
    assert f_other >= 1e-3 * f_ref


def test_non_square_f_is_reported(bf_left):
    with pytest.raises(SpectrumHit, match="not invertible"):
        resolvent(cl2(0), MINIMAL, bf_left, -5.0)
