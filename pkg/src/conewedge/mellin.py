"""Matrix-polynomial algebra in the Mellin covariable.

Conventions: ``D_x = -i d/dx``, ``M[u](s) = int_0^oo x^{-is} u(x) dx/x``, so that
``M[(x D_x) u](s) = s * M[u](s)`` and ``M[x^k u](s) = M[u](s + ik)``.

A matrix polynomial ``P(s) = sum_k C_k s^k`` is stored as a complex array of
shape ``(deg + 1, N, N)`` with ``P[k] = C_k``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import linalg

log = logging.getLogger(__name__)


class NotConeElliptic(ValueError):
    """Leading radial coefficient is singular at the tip."""


class LaurentVerificationFailed(RuntimeError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"laurent-verification-failed: residual {residual:.3e} > {tol:.1e}")
        self.residual = residual


# --------------------------------------------------------------------------
# problem data


def _as_matrix(a, N: int) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        a = a * np.eye(N, dtype=complex)
    if a.shape != (N, N):
        raise ValueError(f"expected {N}x{N} matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class ConeProblem:
    """``A = x^{-m} sum_k a_k(x) (x D_x)^k`` with ``a_k(x) = sum_j coeffs[k][j] x^j``."""

    m: int
    N: int
    coeffs: dict
    taylor_depth: int = 1
    name: str = ""

    def __post_init__(self):
        if self.m < 1 or self.N < 1:
            raise ValueError("order and cross-section dimension must be positive")
        if self.taylor_depth < 1:
            raise ValueError("taylor_depth must be >= 1")
        clean = {}
        for k, taylor in self.coeffs.items():
            k = int(k)
            if not 0 <= k <= self.m:
                raise ValueError(f"coefficient index {k} outside 0..{self.m}")
            clean[k] = tuple(_as_matrix(a, self.N) for a in taylor)
        if self.m not in clean or len(clean[self.m]) == 0:
            raise NotConeElliptic("order coefficient absent")
        lead = clean[self.m][0]
        if np.linalg.cond(lead) > 1e12:
            raise NotConeElliptic("not c-elliptic at tip: leading coefficient A_{m,0} is singular")
        object.__setattr__(self, "coeffs", clean)

    def coefficient(self, k: int, j: int) -> np.ndarray:
        """``A_{k,j}``; zero when absent."""
        taylor = self.coeffs.get(k, ())
        if j < len(taylor):
            return taylor[j]
        return np.zeros((self.N, self.N), dtype=complex)

    @property
    def max_layer(self) -> int:
        """Largest x-power carried by any coefficient (exact polynomial degree in x)."""
        return max(len(t) for t in self.coeffs.values()) - 1

    def same_as(self, other: "ConeProblem", tol: float = 0.0) -> bool:
        if (self.m, self.N) != (other.m, other.N):
            return False
        depth = max(self.max_layer, other.max_layer) + 1
        for k in range(self.m + 1):
            for j in range(depth):
                if np.max(np.abs(self.coefficient(k, j) - other.coefficient(k, j))) > tol:
                    return False
        return True

    def scaled(self, c: complex) -> "ConeProblem":
        return ConeProblem(self.m, self.N, {k: [c * a for a in t] for k, t in self.coeffs.items()},
                           self.taylor_depth, self.name)

    def is_formally_symmetric(self, tol: float = 1e-12) -> bool:
        """Whether the operator equals its formal adjoint on ``x^{-m/2} L^2_b``."""
        return formal_adjoint(self).same_as(self, tol)


@dataclass(frozen=True, eq=False)
class ConormalFamily:
    """Taylor layers ``L_j(s) = sum_k A_{k,j} s^k``; the problem is ``x^{-m} sum_j x^j L_j(x D_x)``."""

    m: int
    N: int
    layers: tuple

    def layer(self, j: int) -> np.ndarray:
        if j < len(self.layers):
            return self.layers[j]
        return np.zeros((1, self.N, self.N), dtype=complex)


def conormal_family(problem: ConeProblem) -> ConormalFamily:
    m, N = problem.m, problem.N
    layers = []
    for j in range(problem.taylor_depth):
        P = np.zeros((m + 1, N, N), dtype=complex)
        for k in range(m + 1):
            P[k] = problem.coefficient(k, j)
        layers.append(P)
    if problem.max_layer >= problem.taylor_depth:
        log.warning("%s: Taylor layers beyond depth %d are dropped", problem.name or "problem",
                    problem.taylor_depth)
    return ConormalFamily(m, N, tuple(layers))


def eval_symbol(P: np.ndarray, s: complex) -> np.ndarray:
    """Horner evaluation of a matrix polynomial."""
    P = np.asarray(P)
    out = np.array(P[-1], dtype=complex)
    for C in P[-2::-1]:
        out = out * s + C
    return out


def taylor_at(P: np.ndarray, s0: complex) -> np.ndarray:
    """Coefficients of ``P(s0 + h)`` in powers of ``h``."""
    P = np.asarray(P, dtype=complex)
    deg = len(P) - 1
    out = np.zeros_like(P)
    for j in range(deg + 1):
        for k in range(j, deg + 1):
            out[j] += comb(k, j) * s0 ** (k - j) * P[k]
    return out


def shift_polynomial(P: np.ndarray, shift: complex) -> np.ndarray:
    """Coefficients of ``s -> P(s + shift)``."""
    return taylor_at(P, shift)


def conjugate_weight(problem: ConeProblem, delta: float) -> ConeProblem:
    """Problem for ``x^{-delta} A x^{delta}``; each ``(x D_x)^k`` becomes ``(x D_x - i delta)^k``."""
    if delta == 0:
        return ConeProblem(problem.m, problem.N, dict(problem.coeffs), problem.taylor_depth, problem.name)
    m, N = problem.m, problem.N
    depth = problem.max_layer + 1
    new = {}
    for p in range(m + 1):
        taylor = []
        for j in range(depth):
            acc = np.zeros((N, N), dtype=complex)
            for k in range(p, m + 1):
                acc += comb(k, p) * (-1j * delta) ** (k - p) * problem.coefficient(k, j)
            taylor.append(acc)
        new[p] = taylor
    return ConeProblem(m, N, new, problem.taylor_depth, problem.name)


def formal_adjoint(problem: ConeProblem) -> ConeProblem:
    """Formal adjoint on the reference space ``x^{-m/2} L^2_b``.

    Layer ``j`` transforms as ``L_j(s) -> L_j^*(s - ij)`` where ``L^*`` conjugate-transposes
    every coefficient.
    """
    m, N = problem.m, problem.N
    new = {p: [] for p in range(m + 1)}
    for j in range(problem.max_layer + 1):
        for q in range(m + 1):
            acc = np.zeros((N, N), dtype=complex)
            for p in range(q, m + 1):
                acc += problem.coefficient(p, j).conj().T * comb(p, q) * (-1j * j) ** (p - q)
            new[q].append(acc)
    return ConeProblem(m, N, new, problem.taylor_depth, problem.name + "*" if problem.name else "")


# --------------------------------------------------------------------------
# boundary spectrum


@dataclass(frozen=True)
class SpectrumPoint:
    sigma: complex
    algebraic_multiplicity: int
    partial_multiplicities: tuple
    jordan_chains: tuple  # tuple of arrays of shape (length, N)
    flags: tuple = ()


@dataclass(frozen=True)
class BoundarySpectrum:
    points: tuple
    all_roots: tuple = field(default=(), repr=False)  # every cluster center, region or not
    warnings: tuple = ()

    def near(self, sigma: complex, tol: float = 1e-8) -> SpectrumPoint | None:
        for p in self.points:
            if abs(p.sigma - sigma) <= tol * max(1.0, abs(sigma)):
                return p
        return None

    @property
    def sigmas(self) -> list:
        return [p.sigma for p in self.points]


def companion(P: np.ndarray) -> np.ndarray:
    """First companion matrix of the monic-ized polynomial (leading coefficient inverted)."""
    P = np.asarray(P, dtype=complex)
    deg = len(P) - 1
    N = P.shape[1]
    lead_inv = np.linalg.inv(P[-1])
    C = np.zeros((deg * N, deg * N), dtype=complex)
    C[: (deg - 1) * N, N:] = np.eye((deg - 1) * N)
    for k in range(deg):
        C[(deg - 1) * N:, k * N:(k + 1) * N] = -lead_inv @ P[k]
    return C


def _cluster(values: np.ndarray, radius: float) -> list:
    groups = []
    remaining = list(range(len(values)))
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for i in list(remaining):
                if min(abs(values[i] - values[g]) for g in group) <= radius:
                    group.append(i)
                    remaining.remove(i)
                    grew = True
        groups.append(group)
    return groups


def _winding_count(P: np.ndarray, center: complex, radius: float, n: int = 256) -> int:
    """Zeros of ``det P`` inside a circle (argument principle via ``tr(P^{-1} P')``)."""
    dP = np.array([k * P[k] for k in range(1, len(P))]) if len(P) > 1 else np.zeros_like(P[:1])
    phi = 2 * np.pi * np.arange(n) / n
    z = center + radius * np.exp(1j * phi)
    acc = 0.0 + 0.0j
    for zi, ph in zip(z, phi):
        acc += np.trace(np.linalg.solve(eval_symbol(P, zi), eval_symbol(dP, zi))) * radius * np.exp(1j * ph)
    return int(round((acc / n).real))


def _null_space(M: np.ndarray, rtol: float) -> np.ndarray:
    if M.size == 0:
        return np.eye(M.shape[1], dtype=complex)
    u, s, vh = linalg.svd(M)
    scale = max(s[0] if len(s) else 0.0, 1.0)
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].conj().T


def _normalize_phase(v: np.ndarray) -> complex:
    """Scalar making the largest-magnitude entry of ``v`` real positive with unit norm."""
    k = int(np.argmax(np.abs(v) > 0.5 * np.max(np.abs(v))))
    return np.abs(v[k]) / v[k] / np.linalg.norm(v)


def jordan_chains(P: np.ndarray, s0: complex, max_len: int, rtol: float = 1e-8):
    """Canonical system of Jordan chains of ``P`` at ``s0``.

    Uses kernels of the lower block-triangular Toeplitz matrices built from the
    Taylor coefficients ``P_j`` at ``s0``. Returns a list of arrays of shape
    ``(length, N)``, longest chains first.
    """
    Pt = taylor_at(P, s0)
    N = Pt.shape[1]
    kernels = []
    for ell in range(1, max_len + 1):
        T = np.zeros((ell * N, ell * N), dtype=complex)
        for i in range(ell):
            for j in range(i + 1):
                if i - j < len(Pt):
                    T[i * N:(i + 1) * N, j * N:(j + 1) * N] = Pt[i - j]
        K = _null_space(T, rtol)
        # eigenvector parts of chains of length >= ell
        heads = K[:N] if K.size else np.zeros((N, 0), dtype=complex)
        r = np.linalg.matrix_rank(heads, tol=1e-7) if heads.size else 0
        if r == 0:
            break
        kernels.append((K, heads, r))
    chains = []
    chosen = np.zeros((N, 0), dtype=complex)
    for ell in range(len(kernels), 0, -1):
        K, heads, r = kernels[ell - 1]
        need = r - chosen.shape[1]
        if need <= 0:
            continue
        # orthonormal basis of span(heads) with already chosen eigenvectors projected out
        Q, _ = np.linalg.qr(chosen) if chosen.shape[1] else (np.zeros((N, 0)), None)
        resid = heads - Q @ (Q.conj().T @ heads)
        u, s, _ = linalg.svd(resid, full_matrices=False)
        for col in range(need):
            v0 = u[:, col]
            c, *_ = np.linalg.lstsq(heads, v0, rcond=None)
            chain = (K @ c).reshape(ell, N)
            chain = chain * _normalize_phase(chain[0])
            chains.append(chain)
            chosen = np.column_stack([chosen, chain[0]])
    chains.sort(key=lambda c: -len(c))
    return chains


def boundary_spectrum(P0: np.ndarray, region=None, tol: float = 1e-8) -> BoundarySpectrum:
    """Roots of ``det P0`` with multiplicities and Jordan chains.

    ``region`` is ``(re_min, re_max, im_min, im_max)``; ``None`` keeps every root.
    """
    P0 = np.asarray(P0, dtype=complex)
    if np.linalg.cond(P0[-1]) > 1e12:
        raise NotConeElliptic("not c-elliptic at tip: leading coefficient is singular")
    C = companion(P0)
    eig = linalg.eigvals(C)
    scale = max(1.0, np.max(np.abs(eig)) if len(eig) else 1.0)
    # perturbed multiple roots spread like eps^(1/k); sqrt(tol) keeps double and triple roots together
    groups = _cluster(eig, np.sqrt(tol) * scale)
    centers = [complex(np.mean(eig[g])) for g in groups]
    warnings = []
    info = []
    for g, c in zip(groups, centers):
        others = [abs(c - d) for d in centers if d is not c]
        gap = min(others) if others else 1.0
        r = 0.5 * gap if others else max(1.0, abs(c))
        r = min(r, 0.1 * scale)
        count = _winding_count(P0, c, r)
        flags = []
        if count != len(g):
            flags.append("clustering-mismatch")
            warnings.append(f"root cluster at {c:.6g}: companion count {len(g)} vs winding count {count}")
        if len(g) == 1:
            c = _polish(P0, c)
        info.append((c, len(g), flags))
    points = []
    for c, mult, flags in info:
        if region is not None:
            re0, re1, im0, im1 = region
            inside = re0 <= c.real <= re1 and im0 <= c.imag <= im1
            if not inside:
                continue
            edge = min(abs(c.real - re0), abs(c.real - re1), abs(c.imag - im0), abs(c.imag - im1))
            if edge <= tol * scale:
                flags = flags + ["boundary-ambiguous"]
        chains = jordan_chains(P0, c, mult, rtol=max(tol, 1e-10))
        partial = tuple(len(ch) for ch in chains)
        if sum(partial) != mult:
            flags = flags + ["chain-count-mismatch"]
            warnings.append(f"root {c:.6g}: partial multiplicities {partial} do not sum to {mult}")
        points.append(SpectrumPoint(c, mult, partial, tuple(chains), tuple(flags)))
    points.sort(key=lambda p: (round(p.sigma.real, 10), round(p.sigma.imag, 10)))
    return BoundarySpectrum(tuple(points), tuple(c for c, _, _ in info), tuple(warnings))


def _polish(P: np.ndarray, s: complex, steps: int = 3) -> complex:
    """Newton steps on the smallest singular triple of ``P(s)``."""
    dP = np.array([k * P[k] for k in range(1, len(P))])
    for _ in range(steps):
        u, sv, vh = linalg.svd(eval_symbol(P, s))
        x, y = vh[-1].conj(), u[:, -1]
        denom = y.conj() @ eval_symbol(dP, s) @ x
        if abs(denom) == 0:
            break
        step = (y.conj() @ eval_symbol(P, s) @ x) / denom
        s = s - step
        if abs(step) <= 1e-16 * max(1.0, abs(s)):
            break
    return complex(s)


# --------------------------------------------------------------------------
# Laurent series


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """``sum_{j >= -pole_order} coefficients[j + pole_order] (s - center)^j`` (truncated)."""

    center: complex
    pole_order: int
    coefficients: np.ndarray  # shape (n, ...) starting at order -pole_order

    def coeff(self, j: int) -> np.ndarray:
        idx = j + self.pole_order
        if 0 <= idx < len(self.coefficients):
            return self.coefficients[idx]
        return np.zeros(self.coefficients.shape[1:], dtype=complex)

    @property
    def top_order(self) -> int:
        return len(self.coefficients) - self.pole_order - 1

    def principal_part(self) -> "LaurentSeries":
        return LaurentSeries(self.center, self.pole_order, np.array(self.coefficients[: self.pole_order]))

    def trimmed(self, tol: float = 1e-13) -> "LaurentSeries":
        c = self.coefficients
        scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        p = self.pole_order
        while p > 0 and np.max(np.abs(c[0])) <= tol * scale:
            c = c[1:]
            p -= 1
        return LaurentSeries(self.center, p, c)


def zero_principal(center: complex, shape) -> LaurentSeries:
    return LaurentSeries(center, 0, np.zeros((0,) + tuple(shape), dtype=complex))


def laurent_product(A: LaurentSeries, B: LaurentSeries, lo: int, hi: int) -> LaurentSeries:
    """Coefficients ``lo..hi`` of ``A * B`` (matrix-matrix or matrix-vector), same center."""
    out = []
    for j in range(lo, hi + 1):
        acc = None
        for a in range(-A.pole_order, A.top_order + 1):
            b = j - a
            if b < -B.pole_order or b > B.top_order:
                continue
            term = A.coeff(a) @ B.coeff(b)
            acc = term if acc is None else acc + term
        if acc is None:
            shape = (A.coefficients.shape[1],) + B.coefficients.shape[2:]
            acc = np.zeros(shape, dtype=complex)
        out.append(acc)
    return LaurentSeries(A.center, -lo, np.array(out))


def laurent_inverse(P0: np.ndarray, s1: complex, K: int, spectrum: BoundarySpectrum | None = None,
                    tol: float = 1e-8, n_nodes: int = 128) -> LaurentSeries:
    """Laurent coefficients of ``P0(s)^{-1}`` at ``s1`` through order ``K``.

    Trapezoid rule on a circle whose radius is half the distance to the nearest
    other root; the result is checked against ``P0 * Q = I`` order by order.
    """
    P0 = np.asarray(P0, dtype=complex)
    N = P0.shape[1]
    roots = list(spectrum.all_roots) if spectrum is not None and spectrum.all_roots else []
    if not roots:
        roots = list(boundary_spectrum(P0, None, tol).all_roots)
    scale = max(1.0, abs(s1))
    others = [abs(r - s1) for r in roots if abs(r - s1) > 1e-7 * scale]
    radius = 0.5 * min(others) if others else 1.0
    on_root = [r for r in roots if abs(r - s1) <= 1e-7 * scale]
    p = 0
    if on_root:
        pt = spectrum.near(s1, 1e-7) if spectrum is not None else None
        if pt is None:
            pt = boundary_spectrum(P0, None, tol).near(s1, 1e-7)
        p = max(pt.partial_multiplicities) if pt is not None and pt.partial_multiplicities else 0
    Pt = taylor_at(P0, s1)
    residual = np.inf
    while True:
        phi = 2 * np.pi * np.arange(n_nodes) / n_nodes
        z = s1 + radius * np.exp(1j * phi)
        vals = np.array([np.linalg.inv(eval_symbol(P0, zi)) for zi in z])
        # Q_j = (1/n) sum_l P^{-1}(z_l) r^{-j} e^{-i j phi_l}
        coeffs = []
        for j in range(-p, K + 1):
            w = np.exp(-1j * j * phi) / n_nodes
            coeffs.append(np.tensordot(w, vals, axes=1) * radius ** (-j))
        Q = LaurentSeries(complex(s1), p, np.array(coeffs))
        residual = _laurent_residual(Pt, Q, K)
        if residual <= tol or n_nodes >= 2048:
            break
        n_nodes *= 2
    if residual > tol:
        raise LaurentVerificationFailed(residual, tol)
    return Q.trimmed(1e-11)


def _laurent_residual(Pt: np.ndarray, Q: LaurentSeries, K: int) -> float:
    N = Pt.shape[1]
    norm = max(1.0, max(np.linalg.norm(c) for c in Pt) * max(np.linalg.norm(c) for c in Q.coefficients))
    worst = 0.0
    for j in range(-Q.pole_order, K + 1):
        acc = -np.eye(N) if j == 0 else np.zeros((N, N), dtype=complex)
        for a in range(len(Pt)):
            acc = acc + Pt[a] @ Q.coeff(j - a)
        worst = max(worst, np.linalg.norm(acc))
    return worst / norm
