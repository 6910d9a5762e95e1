"""Finite-dimensional bordering of the minimal family and reduction to the boundary.

For an injective family ``a(lam)`` with a ``d''``-dimensional cokernel we add columns
``k`` so that ``[a k]`` is invertible; its inverse splits as ``[[B], [T]]``. For an
extension ``D = D_min + span(E)`` the ``d'' x dim E`` matrix ``F = T (A - lam) E``
decides invertibility, and

    (A_D - lam)^{-1} = B + (E - B (A - lam) E) F^{-1} T.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .discrete import MINIMAL, DiscreteOperator, DiscreteSpace, ExtensionSpec, assemble, homogeneity_residual, \
    ker_coker

log = logging.getLogger(__name__)

COND_MAX = 1e8


class IndexJump(RuntimeError):
    pass


class SpectrumHit(RuntimeError):
    pass


class SnapWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class BorderedFamily:
    problem: object
    space: DiscreteSpace
    side: str
    arc: np.ndarray  # unit-modulus samples
    k_hat: tuple  # per sample, rows x d'' (row-value coordinates)
    t_hat: tuple  # per sample, d_ker x cols, or None
    d2: int
    conds: np.ndarray
    strategy: str
    m: int
    mu: int
    bump_centers: tuple = ()
    ops: tuple = field(default=(), repr=False)

    @property
    def common_k(self) -> bool:
        return self.strategy == "bumps"

    def nearest(self, phase: complex) -> int:
        return int(np.argmin(np.abs(self.arc - phase)))


def arc_samples(theta0: float, aperture: float, n: int = 33) -> np.ndarray:
    """``n`` equispaced unit-modulus points with arguments in ``theta0 +- aperture/2`` (radians)."""
    ang = theta0 + aperture * (np.linspace(0, 1, n) - 0.5)
    return np.exp(1j * ang)


def gaussian_profiles(space: DiscreteSpace, N: int, rows: np.ndarray, centers, width: float = 0.6) -> np.ndarray:
    """Smooth, rapidly decaying row-space profiles (one column per center and component)."""
    t = space.t[rows]
    cols = []
    for c in centers:
        g = np.exp(-0.5 * ((t - c) / width) ** 2)
        for comp in range(N):
            e = np.zeros(N)
            e[comp] = 1.0
            cols.append(np.kron(g, e))
    K = np.array(cols).T.astype(complex)
    return K / np.linalg.norm(K, axis=0)


def _normalized(M: np.ndarray, E: np.ndarray) -> np.ndarray:
    scale = np.sqrt(np.sum(np.abs(M) ** 2, axis=0) + np.sum(np.abs(E) ** 2, axis=0))
    return M / scale


def bordered_condition(op: DiscreteOperator, k: np.ndarray, t: np.ndarray | None = None) -> float:
    """Condition number of ``[[a, k], [t, 0]]`` with ``a`` graph-column-normalized."""
    M, E = op.l2_weighted()
    A = _normalized(M, E)
    Kw = k * op.row_weight
    if t is None:
        Bm = np.hstack([A, Kw])
    else:
        scale = np.sqrt(np.sum(np.abs(M) ** 2, axis=0) + np.sum(np.abs(E) ** 2, axis=0))
        tt = t * scale[None, :]
        tt = tt / np.linalg.norm(tt, axis=1, keepdims=True)
        Bm = np.block([[A, Kw], [tt, np.zeros((t.shape[0], k.shape[1]))]])
    s = linalg.svd(Bm, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else np.inf


def _coker_basis(op: DiscreteOperator, d: int) -> np.ndarray:
    M, E = op.l2_weighted()
    A = _normalized(M, E)
    u, _, _ = linalg.svd(A)
    return u[:, -d:] if d else u[:, :0]


def _ker_basis(op: DiscreteOperator, d: int) -> np.ndarray:
    M, E = op.l2_weighted()
    scale = np.sqrt(np.sum(np.abs(M) ** 2, axis=0) + np.sum(np.abs(E) ** 2, axis=0))
    u, s, vh = linalg.svd(M / scale)
    V = vh[-d:].conj().T / scale[:, None]
    return V


def border_family(problem, space: DiscreteSpace, arc: np.ndarray, side: str = "wedge",
                  cond_max: float = COND_MAX, centers=None, strategy: str = "auto") -> BorderedFamily:
    """Border the minimal family ``a(lam) = A_min - lam`` along unit-modulus samples ``arc``.

    ``strategy``: ``"bumps"`` picks one set of Gaussian profiles for the whole arc (extended
    to other moduli by homogeneity); ``"covering"`` uses the local cokernel basis at every
    sample and at every later evaluation point; ``"auto"`` tries bumps first.
    """
    if strategy not in ("auto", "bumps", "covering"):
        raise ValueError(f"unknown bordering strategy {strategy!r}")
    arc = np.asarray(arc, dtype=complex)
    op0 = assemble(problem, space, MINIMAL, 0.0, side)
    ops = [op0.with_lambda(lam) for lam in arc]
    kcs = [ker_coker(op) for op in ops]
    dk = {kc.dim_ker for kc in kcs}
    dc = {kc.dim_coker for kc in kcs}
    if len(dk) > 1 or len(dc) > 1:
        raise IndexJump(f"index jump on arc: kernel dims {sorted(dk)}, cokernel dims {sorted(dc)}")
    dk, dc = dk.pop(), dc.pop()
    m = problem.m
    N = problem.N
    rows = ops[0].rows
    if dc == 0 and dk == 0:
        k0 = np.zeros((len(rows) * N, 0), dtype=complex)
        conds = np.array([bordered_condition(op, k0) for op in ops])
        return BorderedFamily(problem, space, side, arc, tuple(k0 for _ in arc), tuple(None for _ in arc), 0,
                              conds, "trivial", m, m, (), tuple(ops))
    t_hat = tuple(_ker_basis(op, dk).conj().T if dk else None for op in ops)
    if strategy == "covering":
        return _covering(problem, space, side, arc, ops, t_hat, dc, cond_max)
    # cokernel bases at seed samples: ends and middle of the arc
    seeds = sorted({0, len(arc) // 2, len(arc) - 1})
    cok = {i: _coker_basis(ops[i], dc) for i in seeds}
    if centers is None:
        t = space.t[rows]
        centers = np.linspace(max(t[0] + 4.0, -8.0), min(t[-1] - 1.0, -0.5), 40)
    cand = gaussian_profiles(space, N, rows, centers)
    chosen: list = []
    for _ in range(dc):
        best, best_val = None, -1.0
        for c in range(cand.shape[1]):
            if c in chosen:
                continue
            K = cand[:, chosen + [c]]
            val = min(linalg.svd(cok[i].conj().T @ K, compute_uv=False)[-1] for i in seeds)
            if val > best_val:
                best, best_val = c, val
        chosen.append(best)
    K = cand[:, chosen]
    conds = np.array([bordered_condition(op, K, t) for op, t in zip(ops, t_hat)])
    if np.all(conds < cond_max):
        cen = tuple(float(centers[c // N]) for c in chosen)
        return BorderedFamily(problem, space, side, arc, tuple(K for _ in arc), t_hat, dc, conds, "bumps", m, m,
                              cen, tuple(ops))
    if strategy == "bumps":
        raise RuntimeError(f"bump bordering ill-conditioned: condition {conds.max():.3e}")
    log.info("common bump bordering ill-conditioned (max cond %.2e); using local cokernel bases", conds.max())
    return _covering(problem, space, side, arc, ops, t_hat, dc, cond_max)


def local_k(op: DiscreteOperator, d: int) -> np.ndarray:
    """Unit-norm cokernel basis of the minimal operator, in row-value coordinates."""
    k = _coker_basis(op, d)
    return k / np.linalg.norm(k, axis=0) if d else k


def _covering(problem, space, side, arc, ops, t_hat, dc, cond_max) -> BorderedFamily:
    ks = tuple(local_k(op, dc) for op in ops)
    conds = np.array([bordered_condition(op, k, t) for op, k, t in zip(ops, ks, t_hat)])
    if np.any(conds >= cond_max):
        raise RuntimeError(f"bordering failed: condition {conds.max():.3e}")
    return BorderedFamily(problem, space, side, arc, ks, t_hat, dc, conds, "covering", problem.m, problem.m, (),
                          tuple(ops))


def snap_modulus(space: DiscreteSpace, r: float, m: int, warn: bool = True) -> tuple:
    """Nearest grid-compatible ``rho = e^{jh}`` to ``r^{1/m}``; returns ``(j, rho)``."""
    lr = np.log(r) / m
    j = int(round(lr / space.h))
    rho = float(np.exp(j * space.h))
    if warn and abs(lr - j * space.h) > 1e-9 * max(1.0, abs(lr)):
        warnings.warn(f"|lambda|={r:.6g} not grid compatible; snapped to {rho ** m:.6g}", SnapWarning,
                      stacklevel=3)
    return j, rho


def shift_rows(k: np.ndarray, j: int, N: int) -> np.ndarray:
    """``(kappa k)(t) = k(t + j h)`` on row-value vectors (node-major)."""
    if j == 0:
        return k.copy()
    out = np.zeros_like(k)
    n = k.shape[0] // N
    if abs(j) >= n:
        return out
    if j > 0:
        out[: (n - j) * N] = k[j * N:]
    else:
        out[-j * N:] = k[: (n + j) * N]
    return out


@dataclass(frozen=True, eq=False)
class BorderBlocks:
    lam: complex
    k: np.ndarray
    t: np.ndarray | None
    rho: float
    shift: int


def extend_homogeneous(bf: BorderedFamily, lam: complex, warn: bool = True) -> BorderBlocks:
    """Blocks at ``lam`` by ``kappa``-homogeneity: ``k(rho^m lam_hat) = rho^mu kappa_rho k(lam_hat)``."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    r = abs(lam)
    i = bf.nearest(lam / r)
    j, rho = snap_modulus(bf.space, r, bf.m, warn)
    N = bf.problem.N
    k = rho**bf.mu * shift_rows(bf.k_hat[i], j, N)
    return BorderBlocks(complex(lam), k, bf.t_hat[i], rho, j)


def homogeneity_relation_residual(bf: BorderedFamily, lam: complex, rho_steps: int) -> float:
    """Residual of ``blocks(rho^m lam) = rho^mu diag(kappa, 1) blocks(lam) diag(kappa^{-1}, 1)``.

    The ``k`` block is compared exactly; the ``a`` block on the overlap interior.
    """
    space = bf.space
    rho = float(np.exp(rho_steps * space.h))
    b1 = extend_homogeneous(bf, lam, warn=False)
    b2 = extend_homogeneous(bf, rho**bf.m * lam, warn=False)
    N = bf.problem.N
    lhs = b2.k
    rhs = rho**bf.mu * shift_rows(b1.k, rho_steps, N)
    scale = max(np.max(np.abs(lhs)), 1e-300)
    res_k = float(np.max(np.abs(lhs - rhs)) / scale) if lhs.size else 0.0
    res_a = homogeneity_residual(bf.problem, space, rho, lam) if bf.side == "wedge" else 0.0
    return max(res_k, res_a)


@dataclass(frozen=True, eq=False)
class Reduction:
    lam: complex
    F: np.ndarray
    B: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)
    cond: float
    op: DiscreteOperator = field(repr=False)


def reduce_to_boundary(problem, D: ExtensionSpec, bf: BorderedFamily, lam: complex, side: str = "M",
                       op: DiscreteOperator | None = None) -> Reduction:
    """``F(lam) = T(lam)(A - lam)E`` with ``T`` the bottom block of the bordered inverse."""
    if op is None:
        op = assemble(problem, bf.space, D, lam, side)
    else:
        op = op.with_lambda(lam)
    M = op.matrix
    n = op.n_core
    Mc, Me = M[:, :n], M[:, n:]
    if bf.strategy == "covering":
        core = op.core()
        k = local_k(core, bf.d2)
        t = _ker_basis(core, bf.t_hat[0].shape[0]).conj().T if bf.t_hat[0] is not None else None
    else:
        blocks = extend_homogeneous(bf, lam, warn=False)
        k, t = blocks.k, blocks.t
    if t is None:
        Bm = np.hstack([Mc, k])
    else:
        Bm = np.block([[Mc, k], [t, np.zeros((t.shape[0], k.shape[1]))]])
    cond = bordered_condition(op.core(), k / max(np.max(np.abs(k)), 1e-300), t)
    if not np.isfinite(cond) or cond > 1e12:
        log.warning("bordered solve ill-conditioned at lambda=%s: cond %.3e", lam, cond)
    lu = linalg.lu_factor(Bm)
    X = linalg.lu_solve(lu, np.eye(Bm.shape[0], dtype=complex))
    R = M.shape[0]
    B = X[:n, :R]
    T = X[n:, :R]
    F = T @ Me
    return Reduction(complex(lam), F, B, T, k, cond, op)


def resolvent(problem, D: ExtensionSpec, bf: BorderedFamily, lam: complex, side: str = "M",
              op: DiscreteOperator | None = None, spectrum_tol: float = 1e-11):
    """``(A_D - lam)^{-1}`` as an ``L^2 -> L^2`` matrix and the projection ``Pi(lam) = k T``.

    Returns ``(R, Pi, reduction)``.
    """
    red = reduce_to_boundary(problem, D, bf, lam, side, op)
    op = red.op
    n = op.n_core
    F = red.F
    M = op.matrix
    Me = M[:, n:]
    if F.shape[0] != F.shape[1]:
        raise SpectrumHit(f"F(lambda) is {F.shape[0]}x{F.shape[1]}: A_D - lambda is not invertible "
                          "(extension dimension differs from the cokernel dimension)")
    if F.size:
        sv = linalg.svd(F, compute_uv=False)
        if sv[-1] <= spectrum_tol * max(sv[0], 1.0) * max(1.0, np.linalg.norm(red.T) * np.linalg.norm(Me)):
            raise SpectrumHit(f"lambda={lam} in spectrum of A_D (|det F| = {abs(np.prod(sv)):.3e})")
        FiT = np.linalg.solve(F, red.T)
        core = red.B - red.B @ Me @ FiT
        coords = np.vstack([core, FiT])
    else:
        coords = red.B
    R = (op.full_weights[:, None] * (op.E @ coords)) / op.row_weight
    Pi = red.k @ red.T
    return R, Pi, red
