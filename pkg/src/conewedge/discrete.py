"""Log-grid realization of the cone operator, its domains and the dilation group.

Grid: ``t = log x`` on ``[-T, 0]``, uniform. Three equivalent pictures of a function:

* ``u`` the original function on ``(0, 1]``;
* ``w = x^{m/2} u`` lies in ``L^2(dt)`` iff ``u`` lies in the reference space
  ``x^{-m/2} L^2_b``, and ``kappa_rho`` becomes the translation ``w(t + log rho)``;
* ``z = e^{-gamma t} w`` is the coordinate the core columns live in; ``gamma = m``
  (minimal domain) gives ``z = x^{-m/2} u`` where the operator is
  ``sum_j e^{jt} L_j(-i(d/dt + m/2)) - lambda e^{mt}`` with bounded entries, and
  ``gamma = 0`` (maximal domain) gives ``z = w``. Rows are rescaled to match, which
  keeps rank decisions well separated.

Rows of every assembled matrix are the values of ``x^{m/2}(A - lambda)u`` at the
interior nodes, so the row space is ``L^2(dt)`` with uniform weight ``h``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
from numpy.polynomial import Polynomial
from scipy import linalg

from .mellin import ConeProblem, conormal_family
from .singular import SingularFunction, apply_b_operator

RANK_TOL = 1e-7


class DiscretizationError(ValueError):
    pass


class DminNonsimple(ValueError):
    pass


# --------------------------------------------------------------------------
# grid and stencils


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    T: float
    G: int
    m: int
    t: np.ndarray = field(repr=False)
    h: float
    weights: np.ndarray = field(repr=False)

    @property
    def x(self) -> np.ndarray:
        return np.exp(self.t)

    def inner(self, a, b) -> complex:
        """Trapezoid ``L^2(dt)`` inner product of grid functions (shape ``(G,)`` or ``(G, N)``)."""
        a, b = np.asarray(a), np.asarray(b)
        if a.ndim == 1:
            return complex(np.sum(self.weights * np.conj(a) * b))
        return complex(np.sum(self.weights[:, None] * np.conj(a) * b))


def build_space(T: float = 20.0, G: int = 512, m: int = 2) -> DiscreteSpace:
    if T <= 0 or G < 16:
        raise DiscretizationError("need T > 0 and G >= 16")
    t = np.linspace(-T, 0.0, G)
    h = T / (G - 1)
    wts = np.full(G, h)
    wts[0] = wts[-1] = h / 2
    return DiscreteSpace(float(T), int(G), int(m), t, h, wts)


def fd_weights(offsets, q: int, h: float) -> np.ndarray:
    """Weights ``c`` with ``sum_k c_k f(t + offsets_k h) ~ f^{(q)}(t)``."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    V = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[q] = factorial(q)
    return np.linalg.solve(V, rhs) / h**q


def half_width(q: int) -> int:
    return (q + 3) // 2


def diff_matrix(G: int, h: float, q: int) -> np.ndarray:
    """Fourth-order ``q``-th derivative on a uniform grid; one-sided near the ends."""
    D = np.zeros((G, G))
    if q == 0:
        return np.eye(G)
    p = half_width(q)
    n_one = 2 * p + 2
    central = fd_weights(np.arange(-p, p + 1), q, h)
    for i in range(G):
        if p <= i < G - p:
            D[i, i - p:i + p + 1] = central
        elif i < p:
            D[i, :n_one] = fd_weights(np.arange(n_one) - i, q, h)
        else:
            lo = G - n_one
            D[i, lo:] = fd_weights(np.arange(lo, G) - i, q, h)
    return D


def poly_in_dt(P: np.ndarray, c: float) -> np.ndarray:
    """Rewrite ``L(-i(d/dt + c))`` as ``sum_q B_q (d/dt)^q``; returns ``B`` of shape ``(deg+1, N, N)``."""
    P = np.asarray(P, dtype=complex)
    B = np.zeros_like(P)
    for p in range(len(P)):
        for q in range(p + 1):
            B[q] += P[p] * comb(p, q) * (-1j) ** p * c ** (p - q)
    return B


# --------------------------------------------------------------------------
# cut-off


@dataclass(frozen=True)
class Cutoff:
    """Polynomial smoothstep in ``log x``: 1 for ``x <= radius/2``, 0 for ``x >= radius``."""

    radius: float = 0.5
    smoothness: int = 5

    def _poly(self) -> Polynomial:
        n = self.smoothness
        base = Polynomial([0, 1]) ** n * Polynomial([1, -1]) ** n
        S = base.integ()
        return S / S(1.0)

    def derivatives(self, t: np.ndarray, k: int) -> np.ndarray:
        """``d^i omega / dt^i`` for ``i = 0..k``, shape ``(k+1, len(t))``."""
        t = np.asarray(t, dtype=float)
        a = np.log(self.radius / 2)
        L = np.log(2.0)
        s = (t - a) / L
        inside = (s > 0) & (s < 1)
        S = self._poly()
        out = np.zeros((k + 1, len(t)))
        out[0] = np.where(s <= 0, 1.0, 0.0)
        out[0][inside] = 1.0 - S(s[inside])
        Sd = S
        for i in range(1, k + 1):
            Sd = Sd.deriv()
            out[i][inside] = -Sd(s[inside]) / L**i
        return out

    def __call__(self, x) -> np.ndarray:
        return self.derivatives(np.log(np.atleast_1d(x)), 0)[0]


# --------------------------------------------------------------------------
# extension data


@dataclass(frozen=True, eq=False)
class ExtensionSpec:
    mode: str = "minimal"
    basis: tuple = ()
    cutoff_radius: float = 0.5

    def __post_init__(self):
        if self.mode not in ("minimal", "maximal", "span"):
            raise ValueError(f"unknown extension mode {self.mode!r}")
        if self.mode != "span" and self.basis:
            raise ValueError("only span extensions carry a basis")
        if not 0 < self.cutoff_radius <= 1:
            raise ValueError("cutoff_radius must lie in (0, 1]")
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def cutoff(self) -> Cutoff:
        return Cutoff(self.cutoff_radius)

    def to_json(self) -> dict:
        return {"mode": self.mode, "basis": [b.to_json() for b in self.basis],
                "cutoff_radius": self.cutoff_radius}

    @classmethod
    def from_json(cls, obj: dict, N: int | None = None) -> "ExtensionSpec":
        basis = [SingularFunction.from_json(b, N) for b in obj.get("basis", [])]
        return cls(obj.get("mode", "span" if basis else "minimal"), tuple(basis),
                   float(obj.get("cutoff_radius", 0.5)))


MINIMAL = ExtensionSpec("minimal")
MAXIMAL = ExtensionSpec("maximal")


@dataclass(frozen=True, eq=False)
class BlendedProblem:
    """``omega_tau A_wedge + (1 - omega_tau) A``; same conormal symbol as ``A``."""

    problem: ConeProblem
    tau: float

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1): the model has coefficients valid on (0, 1]")

    @property
    def cutoff(self) -> Cutoff:
        return Cutoff(self.tau)


def a_tau(problem: ConeProblem, tau: float) -> BlendedProblem:
    return BlendedProblem(problem, tau)


# --------------------------------------------------------------------------
# operator matrices


def _layers(problem: ConeProblem, side: str) -> list:
    fam = conormal_family(problem)
    if side == "wedge":
        return [fam.layers[0]]
    if side != "M":
        raise ValueError("side must be 'M' or 'wedge'")
    layers = list(fam.layers)
    # exact polynomial coefficients: keep every x-power the problem carries
    for j in range(len(layers), problem.max_layer + 1):
        P = np.zeros((problem.m + 1, problem.N, problem.N), dtype=complex)
        for k in range(problem.m + 1):
            P[k] = problem.coefficient(k, j)
        layers.append(P)
    return layers


def _diff_cache(space: DiscreteSpace, m: int) -> list:
    key = ("_D", m)
    cache = space.__dict__.setdefault("_cache", {})
    if key not in cache:
        cache[key] = [diff_matrix(space.G, space.h, q) for q in range(m + 1)]
    return cache[key]


def grid_operator(layers: list, space: DiscreteSpace, m: int, c: float, row_scale=None) -> np.ndarray:
    """``sum_j diag(e^{jt}) L_j(-i(d/dt + c))`` on all nodes, node-major ``(GN, GN)``."""
    D = _diff_cache(space, m)
    N = layers[0].shape[1]
    G = space.G
    K = np.zeros((G * N, G * N), dtype=complex)
    for j, P in enumerate(layers):
        if not np.any(P):
            continue
        B = poly_in_dt(P, c)
        ej = np.exp(j * space.t)
        for q in range(len(B)):
            if np.any(B[q]):
                K += np.kron(ej[:, None] * D[q], B[q])
    if row_scale is not None:
        K = np.kron(row_scale, np.ones(N))[:, None] * K
    return K


def full_grid_operator(problem, space: DiscreteSpace, side: str = "wedge", lam: complex = 0.0) -> np.ndarray:
    """``x^{m/2}(A - lambda)x^{-m/2}`` acting on ``w`` at every node (entries up to ``e^{mT}``)."""
    m = problem.m
    K = grid_operator(_layers(problem, side), space, m, -m / 2, row_scale=np.exp(-m * space.t))
    return K - lam * np.eye(K.shape[0])


def row_nodes(space: DiscreteSpace, m: int) -> np.ndarray:
    return np.arange(m // 2, space.G - (m - m // 2))


def _companion(P0: np.ndarray, m: int, c: float) -> np.ndarray:
    """First-order system for ``(z, z', ..., z^{(m-1)})`` of ``L_0(-i(d/dt + c)) z = 0``."""
    B = poly_in_dt(P0, c)
    N = B.shape[1]
    lead = np.linalg.inv(B[m])
    C = np.zeros((m * N, m * N), dtype=complex)
    C[: (m - 1) * N, N:] = np.eye((m - 1) * N)
    for q in range(m):
        C[(m - 1) * N:, q * N:(q + 1) * N] = -lead @ B[q]
    return C


def left_modes(P0: np.ndarray, m: int, c: float, tol: float = 1e-8):
    """Schur basis of the Cauchy-data space split at ``Re nu = 0``.

    Modes are ``e^{nu t}`` solutions of the frozen equation in the coordinate whose
    operator is ``L_0(-i(d/dt + c))``. Returns ``(U_plus, U_perp)``; admissible
    Cauchy data lie in ``span(U_plus)``.
    """
    C = _companion(P0, m, c)
    nu = linalg.eigvals(C)
    if np.any(np.abs(nu.real) < tol * max(1.0, m)):
        raise DminNonsimple("Dmin-nonsimple: boundary spectrum on a weight line")
    T, Z, sdim = linalg.schur(C, output="complex", sort=lambda z: z.real > 0)
    return Z[:, :sdim], Z[:, sdim:]


def _null(A: np.ndarray) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=complex)
    _, s, vh = linalg.svd(A)
    r = int(np.sum(s > 1e-12 * max(s[0], 1e-300)))
    return vh[r:].conj().T


def core_basis(problem: ConeProblem, space: DiscreteSpace, gamma: float) -> np.ndarray:
    """Columns in ``z = e^{-gamma t} w`` coordinates: interior identity plus local null spaces at the ends.

    Left end: Cauchy data restricted to modes decaying toward the tip in ``z``.
    ``gamma = m`` gives the minimal domain, ``gamma = 0`` the maximal one.
    """
    m, N, G = problem.m, problem.N, space.G
    P0 = conormal_family(problem).layers[0]
    D = _diff_cache(space, m)
    s = max(2 * half_width(q) + 2 for q in range(m))
    s = max(s, m)
    # left: U_perp^* (Cauchy data at node 0) = 0
    _, U_perp = left_modes(P0, m, gamma - m / 2)
    E = np.zeros((m * N, s * N), dtype=complex)
    for q in range(m):
        E[q * N:(q + 1) * N] = np.kron(D[q][0, :s], np.eye(N))
    left = _null(U_perp.conj().T @ E)
    # right: v^{(q)}(0) = 0 for q < ceil(m/2)
    c = m - m // 2
    R = np.zeros((c * N, s * N), dtype=complex)
    for q in range(c):
        R[q * N:(q + 1) * N] = np.kron(D[q][G - 1, G - s:], np.eye(N))
    right = _null(R)
    n_mid = (G - 2 * s) * N
    cols = left.shape[1] + n_mid + right.shape[1]
    Phi = np.zeros((G * N, cols), dtype=complex)
    Phi[: s * N, : left.shape[1]] = left
    Phi[s * N: (G - s) * N, left.shape[1]: left.shape[1] + n_mid] = np.eye(n_mid)
    Phi[(G - s) * N:, left.shape[1] + n_mid:] = right
    return Phi


# --------------------------------------------------------------------------
# enrichment columns


def _poly_derivative(P: np.ndarray, i: int) -> np.ndarray:
    P = np.asarray(P, dtype=complex)
    for _ in range(i):
        if len(P) == 1:
            return np.zeros_like(P)
        P = np.array([k * P[k] for k in range(1, len(P))])
    return P


def enrichment_column(sf: SingularFunction, layers: list, m: int, space: DiscreteSpace, cutoff: Cutoff,
                      rows: np.ndarray, tol: float = 1e-9):
    """Exact ``w``-profile of ``omega * sf`` on the grid and ``x^{m/2} A (omega sf)`` at the row nodes.

    The operator is applied by the Leibniz rule: derivatives falling on ``omega`` are
    supported away from the tip; the remaining term uses the symbolic action on ``sf``.
    """
    for s, _ in sf.terms:
        if s.imag >= m / 2 - 1e-12:
            raise DiscretizationError(f"enrichment exponent {s} outside the strip: omega*sf not in L^2")
    Psf = apply_b_operator(layers, sf).trimmed(tol)
    for s, _ in Psf.terms:
        if s.imag >= -m / 2 - 1e-12:
            raise DiscretizationError(
                f"enrichment rejected: A(omega*sf) has exponent {s + 1j * m} not in L^2 (infinite graph norm)")
    t = space.t
    x = np.exp(t)
    om = cutoff.derivatives(t, m)
    N = sf.N
    w_full = (x ** (m / 2) * om[0])[:, None] * sf(x)
    tr = t[rows]
    xr = x[rows]
    img = om[0][rows][:, None] * Psf.shift_exponent(-m / 2)(xr)
    for i in range(1, m + 1):
        di = om[i][rows]
        mask = di != 0
        if not np.any(mask):
            continue
        dl = [_poly_derivative(P, i) / factorial(i) for P in layers]
        term = apply_b_operator(dl, sf).shift_exponent(-m / 2)(xr[mask])
        img[mask] += ((-1j) ** i * di[mask])[:, None] * term
    return w_full.reshape(-1), img.reshape(-1)


# --------------------------------------------------------------------------
# assembled operator


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """``x^{m/2}(A - lambda)`` on a discrete domain.

    Coordinates: ``n_core`` core columns (``v``-coordinates) then one column per
    enrichment function. ``M0`` is the image at ``lambda = 0``, ``mass`` the ``w``
    values at the row nodes, ``E`` the ``w`` values at all nodes.
    """

    problem: object
    space: DiscreteSpace
    ext: ExtensionSpec
    side: str
    lam: complex
    M0: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    E: np.ndarray = field(repr=False)
    rows: np.ndarray = field(repr=False)
    n_core: int = 0
    rank_rows: np.ndarray | None = field(default=None, repr=False)  # row scaling used for rank decisions

    @property
    def matrix(self) -> np.ndarray:
        return self.at(self.lam)

    def at(self, lam: complex) -> np.ndarray:
        return self.M0 - lam * self.mass

    @property
    def N(self) -> int:
        return self.E.shape[0] // self.space.G

    @property
    def n_enrich(self) -> int:
        return self.M0.shape[1] - self.n_core

    @property
    def row_weight(self) -> float:
        return np.sqrt(self.space.h)

    @property
    def full_weights(self) -> np.ndarray:
        return np.kron(np.sqrt(self.space.weights), np.ones(self.N))

    def with_lambda(self, lam: complex) -> "DiscreteOperator":
        return DiscreteOperator(self.problem, self.space, self.ext, self.side, lam, self.M0, self.mass, self.E,
                                self.rows, self.n_core, self.rank_rows)

    def core(self) -> "DiscreteOperator":
        n = self.n_core
        return DiscreteOperator(self.problem, self.space, MINIMAL if self.ext.mode == "span" else self.ext,
                                self.side, self.lam, self.M0[:, :n], self.mass[:, :n], self.E[:, :n], self.rows, n,
                                self.rank_rows)

    def l2_weighted(self, lam: complex | None = None):
        """``(W_r M, W_f E)``: operator and domain embedding in ``L^2`` coordinates."""
        lam = self.lam if lam is None else lam
        return self.row_weight * self.at(lam), self.full_weights[:, None] * self.E


def _base_problem(problem):
    return problem.problem if isinstance(problem, BlendedProblem) else problem


def assemble(problem, space: DiscreteSpace, ext: ExtensionSpec = MINIMAL, lam: complex = 0.0,
             side: str = "M") -> DiscreteOperator:
    """Matrix of ``x^{m/2}(A - lambda)x^{-m/2}`` on the domain ``ext``.

    ``problem`` may be a :class:`BlendedProblem`, in which case rows are blended
    pointwise between the full and the frozen-coefficient operator.
    """
    base = _base_problem(problem)
    m, N = base.m, base.N
    if space.m != m:
        raise DiscretizationError("space built for a different order")
    rows = row_nodes(space, m)
    gamma = 0.0 if ext.mode == "maximal" else float(m)
    Phi = core_basis(base, space, gamma)
    rows_idx = (rows[:, None] * N + np.arange(N)[None, :]).ravel()
    ev = np.kron(np.exp(gamma * space.t), np.ones(N))
    row_w = np.kron(np.exp((gamma - m) * space.t[rows]), np.ones(N))

    def image(layers):
        K = grid_operator(layers, space, m, gamma - m / 2)
        return row_w[:, None] * (K[rows_idx] @ Phi)

    full_layers = _layers(base, side)
    M_core = image(full_layers)
    blend = None
    if isinstance(problem, BlendedProblem) and side == "M":
        blend = np.kron(problem.cutoff.derivatives(space.t[rows], 0)[0], np.ones(N))
        M_core = M_core - blend[:, None] * (M_core - image(_layers(base, "wedge")))
    E_core = ev[:, None] * Phi
    cols_M, cols_E = [M_core], [E_core]
    for sf in ext.basis:
        if sf.N != N:
            raise DiscretizationError("enrichment function has wrong cross-section dimension")
        w, img = enrichment_column(sf, full_layers, m, space, ext.cutoff, rows)
        if blend is not None:
            _, img0 = enrichment_column(sf, _layers(base, "wedge"), m, space, ext.cutoff, rows)
            img = img - blend * (img - img0)
        cols_M.append(img[:, None])
        cols_E.append(w[:, None])
    M0 = np.hstack(cols_M)
    E = np.hstack(cols_E)
    mass = E[rows_idx]
    return DiscreteOperator(problem, space, ext, side, complex(lam), M0, mass, E, rows, Phi.shape[1],
                            1.0 / row_w)


# --------------------------------------------------------------------------
# dilations


def grid_shift(space: DiscreteSpace, rho: float) -> int:
    j = np.log(rho) / space.h
    jr = int(round(j))
    if abs(j - jr) > 1e-9 * max(1.0, abs(j)):
        raise DiscretizationError(
            f"rho={rho} is not grid compatible; nearest compatible value is {np.exp(jr * space.h):.12g}")
    return jr


def kappa_discrete(space: DiscreteSpace, rho: float, m: int | None = None, N: int = 1) -> np.ndarray:
    """``(kappa_rho w)(t) = w(t + log rho)`` as a truncated shift matrix."""
    j = grid_shift(space, rho)
    S = np.eye(space.G, k=j)
    return np.kron(S, np.eye(N)) if N > 1 else S


def homogeneity_residual(problem, space: DiscreteSpace, rho: float, lam: complex) -> float:
    """Relative residual of ``(A_w - rho^m lam) - rho^m kappa (A_w - lam) kappa^{-1}`` on the overlap."""
    m, N = problem.m, problem.N
    j = grid_shift(space, rho)
    A = full_grid_operator(problem, space, "wedge", 0.0)
    p = max(half_width(q) for q in range(1, m + 1))
    G = space.G
    lo, hi = p + max(0, -j), G - p - max(0, j)
    if hi - lo < 4:
        raise DiscretizationError("shift leaves no overlap interior")
    idx = np.arange(lo, hi)
    sel = (idx[:, None] * N + np.arange(N)).ravel()
    sh = ((idx + j)[:, None] * N + np.arange(N)).ravel()
    I = np.eye(len(sel))
    lhs = A[np.ix_(sel, sel)] - rho**m * lam * I
    rhs = rho**m * (A[np.ix_(sh, sh)] - lam * I)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))


# --------------------------------------------------------------------------
# kernel / cokernel


@dataclass(frozen=True)
class KerCoker:
    dim_ker: int
    dim_coker: int
    index: int
    singular_values: np.ndarray = field(repr=False)
    ill_separated: bool = False

    def __iter__(self):
        return iter((self.dim_ker, self.dim_coker, self.index))


def graph_column_normalized(op: DiscreteOperator, lam: complex | None = None) -> np.ndarray:
    """Rank matrix: rows in the well-scaled (b-type) form, columns normalized in graph norm."""
    M, E = op.l2_weighted(lam)
    if op.rank_rows is not None:
        M = op.rank_rows[:, None] * M
    scale = np.sqrt(np.sum(np.abs(M) ** 2, axis=0) + np.sum(np.abs(E) ** 2, axis=0))
    return M / scale


def ker_coker(op: DiscreteOperator, tol: float = RANK_TOL, lam: complex | None = None) -> KerCoker:
    """Rank decision on the graph-column-normalized matrix."""
    A = graph_column_normalized(op, lam)
    s = linalg.svd(A, compute_uv=False)
    cut = tol * s[0]
    rank = int(np.sum(s > cut))
    ill = bool(np.any((s > cut / 10) & (s < cut * 10)))
    if ill:
        warnings.warn("ill-separated: a singular value lies within a factor 10 of the rank threshold",
                      stacklevel=2)
    rows, cols = A.shape
    return KerCoker(cols - rank, rows - rank, cols - rows, s, ill)


def graph_norm(op: DiscreteOperator, v, lam: complex | None = None) -> float:
    """``||u|| + ||A u||`` for domain coordinates ``v``."""
    v = np.asarray(v)
    M, E = op.l2_weighted(lam)
    return float(np.linalg.norm(E @ v) + np.linalg.norm(M @ v))


def injectivity_modulus(op: DiscreteOperator, lam: complex | None = None) -> float:
    """``inf ||(A - lam) u|| / ||u||`` over the discrete domain (0 if not injective)."""
    M, E = op.l2_weighted(lam)
    Q, R = linalg.qr(M, mode="economic")
    d = np.abs(np.diag(R))
    if d.min() <= 1e-13 * d.max():
        return 0.0
    X = linalg.solve_triangular(R.T, E.T, lower=True).T  # E R^{-1}
    top = linalg.svd(X, compute_uv=False)[0]
    return float(1.0 / top)


def solve_operator(op: DiscreteOperator, lam: complex | None = None) -> np.ndarray:
    """Dense ``L^2 -> L^2`` matrix of ``(A_D - lam)^{-1}`` (square domains only)."""
    M, E = op.l2_weighted(lam)
    if M.shape[0] != M.shape[1]:
        raise DiscretizationError("domain does not give a square system")
    return E @ np.linalg.solve(M, np.eye(M.shape[0]))


def resolvent_norm(op: DiscreteOperator, lam: complex | None = None) -> float:
    return float(np.linalg.norm(solve_operator(op, lam), 2))


def eigenvalues(op: DiscreteOperator, k: int = 5) -> np.ndarray:
    """Smallest-modulus finite eigenvalues of the discrete realization."""
    ev = linalg.eigvals(op.M0, op.mass)
    ev = ev[np.isfinite(ev)]
    return ev[np.argsort(np.abs(ev))][:k]


def smallest_singular_value(op: DiscreteOperator, lam: complex | None = None) -> float:
    """Smallest ``L^2`` singular value of a square realization: ``1 / ||(A_D - lam)^{-1}||``."""
    M, E = op.l2_weighted(lam)
    try:
        return 1.0 / resolvent_norm(op, lam)
    except np.linalg.LinAlgError:
        return 0.0
