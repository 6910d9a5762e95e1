"""Singular functions ``sum_sigma sum_k c_{sigma,k} log^k(x) x^{i sigma}`` and their calculus.

The Mellin principal part of ``omega * c log^k(x) x^{i s1}`` at ``s1`` does not
depend on the cut-off and equals ``c (-1)^k k! i^{k+1} / (s - s1)^{k+1}``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .mellin import BoundarySpectrum, ConormalFamily, LaurentSeries, zero_principal

EXP_TOL = 1e-9


class NonSimpleDomain(ValueError):
    """Boundary spectrum meets the lines ``Im s = +-m/2``."""


@dataclass(frozen=True, eq=False)
class SingularFunction:
    """Immutable finite sum of ``log^k x * x^{i sigma}`` terms with vector coefficients.

    ``terms`` is a tuple of ``(sigma, coeffs)`` with ``coeffs`` of shape ``(K+1, N)``.
    Use :meth:`build` to merge equal exponents and drop vanishing terms.
    """

    N: int
    terms: tuple = ()

    @classmethod
    def build(cls, N: int, pairs, tol: float = 0.0) -> "SingularFunction":
        merged: list = []
        for sigma, c in pairs:
            c = np.atleast_2d(np.asarray(c, dtype=complex))
            if c.shape[1] != N:
                raise ValueError(f"coefficient vectors must have length {N}")
            sigma = complex(sigma)
            for i, (s, acc) in enumerate(merged):
                if abs(s - sigma) <= EXP_TOL * max(1.0, abs(s)):
                    K = max(len(acc), len(c))
                    new = np.zeros((K, N), dtype=complex)
                    new[: len(acc)] += acc
                    new[: len(c)] += c
                    merged[i] = (s, new)
                    break
            else:
                merged.append((sigma, c.copy()))
        out = []
        for s, c in merged:
            keep = len(c)
            while keep > 0 and np.max(np.abs(c[keep - 1])) <= tol:
                keep -= 1
            if keep:
                arr = c[:keep].copy()
                arr.setflags(write=False)
                out.append((s, arr))
        out.sort(key=lambda t: (-t[0].imag, t[0].real))
        return cls(N, tuple(out))

    @classmethod
    def zero(cls, N: int) -> "SingularFunction":
        return cls(N, ())

    @classmethod
    def monomial(cls, sigma: complex, vector, log_power: int = 0) -> "SingularFunction":
        v = np.atleast_1d(np.asarray(vector, dtype=complex))
        c = np.zeros((log_power + 1, len(v)), dtype=complex)
        c[log_power] = v
        return cls.build(len(v), [(sigma, c)])

    # ---- algebra
    def __add__(self, other: "SingularFunction") -> "SingularFunction":
        return SingularFunction.build(self.N, list(self.terms) + list(other.terms))

    def __neg__(self) -> "SingularFunction":
        return self.scale(-1.0)

    def __sub__(self, other: "SingularFunction") -> "SingularFunction":
        return self + (-other)

    def scale(self, c: complex) -> "SingularFunction":
        return SingularFunction.build(self.N, [(s, c * a) for s, a in self.terms])

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def trimmed(self, tol: float = 1e-12) -> "SingularFunction":
        """Drop coefficients below ``tol`` relative to the largest one."""
        sc = self.norm_inf()
        return SingularFunction.build(self.N, self.terms, tol * max(sc, 1e-300))

    # ---- queries
    @property
    def exponents(self) -> list:
        return [s for s, _ in self.terms]

    def term(self, sigma: complex) -> np.ndarray | None:
        for s, c in self.terms:
            if abs(s - sigma) <= EXP_TOL * max(1.0, abs(s)):
                return c
        return None

    def restrict(self, sigma: complex) -> "SingularFunction":
        c = self.term(sigma)
        return SingularFunction.zero(self.N) if c is None else SingularFunction.build(self.N, [(sigma, c)])

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(np.max(np.abs(c)) <= tol for _, c in self.terms)

    def norm_inf(self) -> float:
        return max((float(np.max(np.abs(c))) for _, c in self.terms), default=0.0)

    def log_degree(self) -> int:
        return max((len(c) - 1 for _, c in self.terms), default=-1)

    def close_to(self, other: "SingularFunction", tol: float = 1e-10) -> bool:
        return (self - other).is_zero(tol)

    def shift_exponent(self, j: int) -> "SingularFunction":
        """Multiply by ``x^j``."""
        return SingularFunction.build(self.N, [(s - 1j * j, c) for s, c in self.terms])

    def __call__(self, x) -> np.ndarray:
        """Pointwise values, shape ``(len(x), N)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.log(x)
        out = np.zeros((len(x), self.N), dtype=complex)
        for s, c in self.terms:
            xs = np.exp(1j * s * t)
            for k in range(len(c)):
                out += np.outer(xs * t**k, c[k])
        return out

    def coefficient_vector(self) -> np.ndarray:
        return np.concatenate([c.ravel() for _, c in self.terms]) if self.terms else np.zeros(0, complex)

    def __repr__(self):
        parts = []
        for s, c in self.terms:
            for k, v in enumerate(c):
                if np.any(v != 0):
                    lg = "" if k == 0 else (" log x" if k == 1 else f" log^{k} x")
                    parts.append(f"{np.round(v, 10).tolist()}{lg} x^(i*{s:.6g})")
        return "SingularFunction(" + (" + ".join(parts) or "0") + ")"

    # ---- serialization
    def to_json(self) -> dict:
        return {"terms": [{"sigma": [s.real, s.imag],
                           "coeffs": [[[z.real, z.imag] for z in v] for v in c]} for s, c in self.terms]}

    @classmethod
    def from_json(cls, obj: dict, N: int | None = None) -> "SingularFunction":
        pairs = []
        for t in obj.get("terms", []):
            s = complex(*t["sigma"])
            coeffs = []
            for v in t["coeffs"]:
                coeffs.append([complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in v])
            pairs.append((s, np.array(coeffs, dtype=complex)))
        if N is None:
            if not pairs:
                raise ValueError("cannot infer cross-section dimension of an empty singular function")
            N = pairs[0][1].shape[1]
        return cls.build(N, pairs)


@dataclass(frozen=True)
class QuotientBasis:
    sigma_groups: tuple  # tuple of (sigma0, tuple of SingularFunction)
    total_dim: int

    def elements(self) -> list:
        return [u for _, grp in self.sigma_groups for u in grp]

    def group(self, sigma0: complex) -> tuple:
        for s, g in self.sigma_groups:
            if abs(s - sigma0) <= EXP_TOL * max(1.0, abs(s)):
                return g
        return ()


# --------------------------------------------------------------------------
# strip and quotient


def boundary_line_points(spec: BoundarySpectrum, m: int, tol: float = 1e-8) -> list:
    return [p.sigma for p in spec.points if abs(abs(p.sigma.imag) - m / 2) <= tol * max(1.0, m)]


def strip_sigma(spec: BoundarySpectrum, m: int, tol: float = 1e-8) -> list:
    """Spectrum points in the open strip ``-m/2 < Im s < m/2``.

    Points on the boundary lines are excluded and trigger a ``Dmin-nonsimple`` warning.
    """
    flagged = boundary_line_points(spec, m, tol)
    if flagged:
        warnings.warn(f"Dmin-nonsimple: boundary spectrum on Im s = +-{m / 2}: {flagged}", stacklevel=2)
    h = m / 2 - tol * max(1.0, m)
    return [p.sigma for p in spec.points if -h < p.sigma.imag < h]


def _chain_solutions(sigma0: complex, chain: np.ndarray) -> list:
    """``u_l = x^{i s0} sum_b v_{l-b} (i log x)^b / b!`` for ``l < len(chain)``."""
    N = chain.shape[1]
    out = []
    for l in range(len(chain)):
        c = np.zeros((l + 1, N), dtype=complex)
        for b in range(l + 1):
            c[b] = chain[l - b] * (1j**b) / factorial(b)
        top = c[-1]
        k = int(np.argmax(np.abs(top) > 0.5 * np.max(np.abs(top))))
        c = c * (abs(top[k]) / top[k]) / np.linalg.norm(top)
        out.append(SingularFunction.build(N, [(sigma0, c)]))
    return out


def wedge_quotient_basis(spec: BoundarySpectrum, m: int, tol: float = 1e-8) -> QuotientBasis:
    """Basis of the model quotient: solutions of ``L_0(x D_x) u = 0`` with exponents in the strip."""
    if boundary_line_points(spec, m, tol):
        raise NonSimpleDomain("minimal domain not of simple form: boundary spectrum on Im s = +-m/2")
    sig = strip_sigma(spec, m, tol)
    groups = []
    total = 0
    for p in spec.points:
        if not any(abs(p.sigma - s) <= EXP_TOL for s in sig):
            continue
        elems = []
        for chain in p.jordan_chains:
            elems.extend(_chain_solutions(p.sigma, np.asarray(chain)))
        groups.append((p.sigma, tuple(elems)))
        total += len(elems)
    return QuotientBasis(tuple(groups), total)


def quotient_dimension(spec: BoundarySpectrum, m: int, tol: float = 1e-8) -> int:
    if boundary_line_points(spec, m, tol):
        raise NonSimpleDomain("minimal domain not of simple form: boundary spectrum on Im s = +-m/2")
    sig = strip_sigma(spec, m, tol)
    return sum(p.algebraic_multiplicity for p in spec.points if any(abs(p.sigma - s) <= EXP_TOL for s in sig))


# --------------------------------------------------------------------------
# Mellin dictionary


def mellin_singular_part(sf: SingularFunction, sigma1: complex) -> LaurentSeries:
    """Principal part at ``sigma1`` of the Mellin transform of ``omega * sf``.

    Coefficients are vectors; ``coefficients[0]`` multiplies ``(s - sigma1)^{-pole_order}``.
    """
    c = sf.term(sigma1)
    if c is None:
        return zero_principal(sigma1, (sf.N,))
    K = len(c) - 1
    a = np.zeros((K + 1, sf.N), dtype=complex)
    for k in range(K + 1):
        # order -(k+1) sits at index K - k
        a[K - k] = c[k] * (-1) ** k * factorial(k) * 1j ** (k + 1)
    return LaurentSeries(complex(sigma1), K + 1, a)


def singular_from_principal_part(L: LaurentSeries, N: int | None = None) -> SingularFunction:
    """Inverse of :func:`mellin_singular_part` for a single exponent."""
    p = L.pole_order
    if N is None:
        N = L.coefficients.shape[-1] if L.coefficients.ndim > 1 else 1
    if p == 0:
        return SingularFunction.zero(N)
    c = np.zeros((p, N), dtype=complex)
    for n in range(1, p + 1):
        a = L.coeff(-n)
        c[n - 1] = a / ((-1) ** (n - 1) * factorial(n - 1) * 1j**n)
    return SingularFunction.build(N, [(L.center, c)])


# --------------------------------------------------------------------------
# exact action of b-operators


def xdx(sigma: complex, c: np.ndarray) -> np.ndarray:
    """``x D_x`` on ``sum_k c_k log^k x x^{i sigma}`` (coefficient form)."""
    out = sigma * c
    if len(c) > 1:
        ks = np.arange(1, len(c))[:, None]
        out[:-1] = out[:-1] - 1j * ks * c[1:]
    return out


def apply_polynomial(P: np.ndarray, sigma: complex, c: np.ndarray) -> np.ndarray:
    """``L(x D_x)`` on one exponent group; ``P`` has shape ``(deg+1, N, N)``."""
    P = np.asarray(P, dtype=complex)
    acc = np.zeros_like(c)
    power = c.copy()
    for k in range(len(P)):
        if k:
            power = xdx(sigma, power)
        acc = acc + power @ P[k].T
    return acc


def apply_b_operator(layers, sf: SingularFunction, tol: float = 0.0) -> SingularFunction:
    """Exact ``sum_j x^j L_j(x D_x)`` applied to ``sf``.

    ``layers`` is a :class:`ConormalFamily`, a sequence of matrix polynomials
    (index = x-power) or a dict ``{j: polynomial}``.
    """
    if isinstance(layers, ConormalFamily):
        items = list(enumerate(layers.layers))
    elif isinstance(layers, dict):
        items = list(layers.items())
    else:
        items = list(enumerate(layers))
    pairs = []
    for j, P in items:
        for s, c in sf.terms:
            pairs.append((s - 1j * j, apply_polynomial(P, s, c)))
    out = SingularFunction.build(sf.N, pairs)
    if tol:
        out = SingularFunction.build(sf.N, out.terms, tol * max(sf.norm_inf(), 1e-300))
    return out


def log_binomial_shift(c: np.ndarray, a: float) -> np.ndarray:
    """Coefficients of ``sum_k c_k (log x + a)^k`` in powers of ``log x``."""
    K = len(c)
    out = np.zeros_like(c)
    for k in range(K):
        for q in range(k + 1):
            out[q] += comb(k, q) * a ** (k - q) * c[k]
    return out
