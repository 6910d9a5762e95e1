"""The isomorphism between the quotient of the operator and that of its model cone.

For ``s0`` in the strip, ``theta^{-1} psi = sum_{v=0}^{N(s0)} e_v`` with ``e_0 = psi`` and
``e_v`` the unique singular function at ``s0 - i v`` that cancels the lower-order
layers acting on ``e_0, ..., e_{v-1}`` modulo functions holomorphic there.

Layer convention: the operator is ``x^{-m} sum_j x^j L_j(x D_x)`` and the Mellin symbol
of ``x^j L_j(x D_x)`` acting on ``u`` is ``L_j(s + ij) * M[u](s + ij)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import ceil

import numpy as np

from .mellin import BoundarySpectrum, ConormalFamily, LaurentSeries, boundary_spectrum, laurent_inverse, \
    laurent_product, taylor_at
from .singular import EXP_TOL, SingularFunction, log_binomial_shift, mellin_singular_part, \
    singular_from_principal_part, strip_sigma

log = logging.getLogger(__name__)


class AmbiguousAttribution(ValueError):
    pass


def n_sigma(sigma0: complex, m: int) -> int:
    """Largest integer ``n`` with ``Im s0 - n > -m/2``."""
    return ceil(sigma0.imag + m / 2 - 1e-12) - 1


@dataclass(frozen=True)
class ThetaExpansion:
    sigma0: complex
    e_list: tuple
    N_sigma0: int

    def total(self) -> SingularFunction:
        out = self.e_list[0]
        for e in self.e_list[1:]:
            out = out + e
        return out


def _spectrum(fam: ConormalFamily, spec: BoundarySpectrum | None) -> BoundarySpectrum:
    if spec is None or not spec.all_roots:
        return boundary_spectrum(fam.layers[0])
    return spec


def _single_exponent(psi: SingularFunction) -> complex:
    if len(psi.terms) != 1:
        raise ValueError("e_recursion needs a single-exponent singular function")
    return psi.terms[0][0]


def e_recursion(psi: SingularFunction, fam: ConormalFamily, spec: BoundarySpectrum | None = None,
                tol: float = 1e-8, sigma0: complex | None = None) -> ThetaExpansion:
    """Compute ``e_0 = psi, e_1, ..., e_{N(s0)}`` for ``psi`` supported at one exponent."""
    spec = _spectrum(fam, spec)
    if psi.is_zero():
        if sigma0 is None:
            raise ValueError("zero input needs an explicit exponent")
        n = n_sigma(sigma0, fam.m)
        return ThetaExpansion(sigma0, tuple(SingularFunction.zero(fam.N) for _ in range(n + 1)), n)
    s0 = _single_exponent(psi)
    n = n_sigma(s0, fam.m)
    if n >= len(fam.layers):
        log.info("layers %d..%d are not retained and are treated as zero", len(fam.layers), n)
    es = [psi]
    for v in range(1, n + 1):
        s1 = s0 - 1j * v
        S = None
        for k in range(1, v + 1):
            if k >= len(fam.layers) or not np.any(fam.layers[k]):
                continue
            pp = mellin_singular_part(es[v - k].shift_exponent(k), s1)
            if pp.pole_order == 0:
                continue
            poly = taylor_at(fam.layers[k], s1 + 1j * k)
            Lk = LaurentSeries(s1, 0, poly)
            term = laurent_product(Lk, pp, -pp.pole_order, len(poly) - 1)
            S = term if S is None else _laurent_add(S, term)
        if S is None:
            es.append(SingularFunction.zero(fam.N))
            continue
        q = S.pole_order
        Q = laurent_inverse(fam.layers[0], s1, max(q + len(fam.layers[0]), 1), spec, tol)
        prod = laurent_product(Q, S, -(Q.pole_order + q), -1)
        neg = LaurentSeries(s1, prod.pole_order, -prod.coefficients)
        e = singular_from_principal_part(neg, fam.N)
        es.append(e.trimmed(1e-13))
    return ThetaExpansion(s0, tuple(es), n)


def _laurent_add(A: LaurentSeries, B: LaurentSeries) -> LaurentSeries:
    lo = -max(A.pole_order, B.pole_order)
    hi = max(A.top_order, B.top_order)
    coeffs = np.array([A.coeff(j) + B.coeff(j) for j in range(lo, hi + 1)])
    return LaurentSeries(A.center, -lo, coeffs)


def _components(psi: SingularFunction, sigma: list) -> list:
    comps = []
    for s in sigma:
        c = psi.restrict(s)
        if not c.is_zero():
            comps.append((s, c))
    return comps


def theta_inverse(psi: SingularFunction, fam: ConormalFamily, spec: BoundarySpectrum | None = None,
                  tol: float = 1e-8) -> SingularFunction:
    """Map a model-quotient element to the corresponding operator-quotient element."""
    spec = _spectrum(fam, spec)
    sigma = strip_sigma(spec, fam.m)
    rest = psi
    out = SingularFunction.zero(psi.N)
    for s, comp in _components(psi, sigma):
        out = out + e_recursion(comp, fam, spec, tol).total()
        rest = rest - comp
    if not rest.is_zero(1e-14 * max(1.0, psi.norm_inf())):
        raise ValueError(f"input has exponents outside the strip: {rest.exponents}")
    return out


def theta_forward(u: SingularFunction, spec: BoundarySpectrum, m: int, fam: ConormalFamily | None = None,
                  tol: float = 1e-8) -> SingularFunction:
    """Keep the leading part of each strip group.

    With ``fam`` the groups are peeled off by descending ``Im s0`` (subtract ``theta^{-1}``
    of each leading part), which resolves exponents that are both in the strip and a
    lower term of another group. Without ``fam`` such exponents are rejected.
    """
    sigma = sorted(strip_sigma(spec, m), key=lambda s: (-s.imag, s.real))
    scale = max(1.0, u.norm_inf())
    if fam is not None:
        rest = u
        out = SingularFunction.zero(u.N)
        for s in sigma:
            comp = rest.restrict(s)
            if comp.is_zero():
                continue
            out = out + comp
            rest = rest - e_recursion(comp, fam, spec, tol).total()
        if not rest.trimmed(0).is_zero(1e-9 * scale):
            raise AmbiguousAttribution(f"ambiguous attribution: residual exponents {rest.exponents}")
        return out
    out = SingularFunction.zero(u.N)
    for s, c in u.terms:
        in_strip = any(abs(s - t) <= EXP_TOL * max(1.0, abs(t)) for t in sigma)
        lower = [t for t in sigma for v in range(1, n_sigma(t, m) + 1)
                 if abs(s - (t - 1j * v)) <= EXP_TOL * max(1.0, abs(t))]
        if in_strip and lower:
            raise AmbiguousAttribution(f"ambiguous attribution: exponent {s} is in the strip and below {lower}")
        if in_strip:
            out = out + SingularFunction.build(u.N, [(s, c)])
        elif not lower:
            raise AmbiguousAttribution(f"ambiguous attribution: exponent {s} belongs to no strip group")
    return out


theta = theta_forward


def kappa_on_singular(sf: SingularFunction, rho: float, m: int) -> SingularFunction:
    """``(kappa_rho u)(x) = rho^{m/2} u(rho x)`` applied termwise."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    lr = np.log(rho)
    pairs = []
    for s, c in sf.terms:
        pairs.append((s, rho ** (m / 2) * np.exp(1j * s * lr) * log_binomial_shift(c, lr)))
    return SingularFunction.build(sf.N, pairs)


def kappa_tilde(u: SingularFunction, rho: float, fam: ConormalFamily, spec: BoundarySpectrum | None = None,
                tol: float = 1e-8) -> SingularFunction:
    spec = _spectrum(fam, spec)
    return theta_inverse(kappa_on_singular(theta_forward(u, spec, fam.m, fam, tol), rho, fam.m), fam, spec, tol)


def L_rho(u: SingularFunction, rho: float, fam: ConormalFamily, spec: BoundarySpectrum | None = None,
          tol: float = 1e-8) -> SingularFunction:
    """``kappa_rho^{-1} kappa_tilde_rho u``; tends to ``theta u`` as ``rho`` grows."""
    return kappa_on_singular(kappa_tilde(u, rho, fam, spec, tol), 1.0 / rho, fam.m)


def e_rho(psi: SingularFunction, v: int, rho: float, fam: ConormalFamily,
          spec: BoundarySpectrum | None = None, tol: float = 1e-8) -> SingularFunction:
    """``rho^v kappa_rho^{-1} e_v kappa_rho psi``: polynomial in ``log rho``."""
    exp = e_recursion(kappa_on_singular(psi, rho, fam.m), fam, spec, tol)
    if v >= len(exp.e_list):
        return SingularFunction.zero(psi.N)
    return rho**v * kappa_on_singular(exp.e_list[v], 1.0 / rho, fam.m)


def domain_transfer(E_basis, fam: ConormalFamily, spec: BoundarySpectrum | None = None,
                    tol: float = 1e-8) -> list:
    """Apply ``theta`` to a basis of ``D / D_min`` and check that the rank is preserved."""
    spec = _spectrum(fam, spec)
    out = [theta_forward(u, spec, fam.m, fam, tol) for u in E_basis]
    if E_basis:
        rank = _rank(out)
        assert rank == len(E_basis), f"theta dropped rank: {rank} < {len(E_basis)}"
    return out


def _rank(fns: list) -> int:
    exps = []
    for f in fns:
        for s, c in f.terms:
            if not any(abs(s - e) <= EXP_TOL for e, _ in exps):
                exps.append((s, len(c)))
            else:
                i = next(i for i, (e, _) in enumerate(exps) if abs(s - e) <= EXP_TOL)
                exps[i] = (exps[i][0], max(exps[i][1], len(c)))
    if not exps:
        return 0
    N = fns[0].N
    rows = []
    for f in fns:
        v = []
        for e, K in exps:
            c = f.term(e)
            block = np.zeros((K, N), dtype=complex)
            if c is not None:
                block[: len(c)] = c
            v.append(block.ravel())
        rows.append(np.concatenate(v))
    return int(np.linalg.matrix_rank(np.array(rows), tol=1e-9))
