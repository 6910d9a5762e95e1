"""Ray and sector experiments: symbol conditions, background spectrum, resolvent growth.

Every probe returns a small dataclass; fits are least squares of log-magnitudes on the
top decade of the sampled moduli.
"""
from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .border import SnapWarning, SpectrumHit, arc_samples, border_family, reduce_to_boundary, resolvent, \
    snap_modulus
from .discrete import MINIMAL, DiscreteSpace, ExtensionSpec, a_tau, assemble, build_space, eigenvalues, \
    injectivity_modulus, ker_coker
from .mellin import ConeProblem, boundary_spectrum, conormal_family, formal_adjoint
from .singular import SingularFunction, wedge_quotient_basis
from .theta import domain_transfer, kappa_on_singular, kappa_tilde, theta_inverse

log = logging.getLogger(__name__)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CONEWEDGE_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(n) as ex:
        return list(ex.map(fn, items))


def fit_exponent(r, y, decades: float = 1.0) -> float:
    """Slope of ``log y`` against ``log r`` over the top ``decades`` of ``r``."""
    r, y = np.asarray(r, float), np.asarray(y, float)
    ok = (r > 0) & (y > 0) & np.isfinite(y)
    r, y = r[ok], y[ok]
    if len(r) < 2:
        return float("nan")
    sel = r >= r.max() / 10**decades
    if sel.sum() < 2:
        sel = np.argsort(r)[-2:]
    return float(np.polyfit(np.log(r[sel]), np.log(y[sel]), 1)[0])


def in_sector(lam: complex, theta0: float, aperture: float) -> bool:
    if lam == 0:
        return False
    d = np.angle(lam * np.exp(-1j * theta0))
    return abs(d) <= aperture / 2 + 1e-12


# --------------------------------------------------------------------------
# symbol conditions


@dataclass(frozen=True)
class CSymbolReport:
    theta0: float
    aperture: float
    eigenvalues: np.ndarray = field(repr=False)
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def csymbol_ray_check(problem: ConeProblem, theta0: float, aperture: float, n_samples: int = 64) -> CSymbolReport:
    """Eigenvalues of the principal radial symbol ``a_m(x) xi^m`` (``|xi| = 1``) against a closed sector."""
    xs = np.linspace(0.0, 1.0, n_samples)
    m = problem.m
    evs = []
    viol = []
    for x in xs:
        a = sum(problem.coefficient(m, j) * x**j for j in range(problem.max_layer + 1))
        for xi in (1.0, -1.0):
            for e in linalg.eigvals(a * xi**m):
                evs.append(e)
                if in_sector(e, theta0, aperture):
                    viol.append((float(x), xi, complex(e)))
    return CSymbolReport(theta0, aperture, np.array(evs), tuple(viol))


# --------------------------------------------------------------------------
# background spectrum


@dataclass(frozen=True)
class SectorCell:
    lam: complex
    s_inj: float
    s_surj: float
    label: str


@dataclass(frozen=True)
class SectorScan:
    angles: np.ndarray
    radii: np.ndarray
    cells: tuple  # row per angle
    thresholds: tuple
    ray_labels: tuple
    radially_consistent: tuple

    def label_at(self, angle: float) -> str:
        return self.ray_labels[int(np.argmin(np.abs(np.angle(np.exp(1j * (self.angles - angle))))))]


def classify(ratio: float, good: float, bad: float) -> str:
    if ratio >= good:
        return "injective-and-surjective"
    if ratio < bad:
        return "deficient"
    return "ill-conditioned"


def bg_spectrum_scan(problem: ConeProblem, angles, radii, space: DiscreteSpace | None = None,
                     good: float = 0.5, bad: float = 0.25) -> SectorScan:
    """Classify ``lam`` by ``s/|lam|`` for the minimal model family and its formal adjoint.

    ``s_inj`` measures injectivity of ``A_wedge,min - lam``; ``s_surj`` measures injectivity
    of the adjoint family at ``conj(lam)``, i.e. surjectivity of the maximal family.
    """
    space = space or build_space(20.0, 512, problem.m)
    angles = np.asarray(angles, float)
    radii = np.asarray(radii, float)
    op = assemble(problem, space, MINIMAL, 0.0, "wedge")
    op_t = assemble(formal_adjoint(problem), space, MINIMAL, 0.0, "wedge")

    def cell(lam):
        si = injectivity_modulus(op, lam)
        ss = injectivity_modulus(op_t, np.conj(lam))
        return SectorCell(complex(lam), si, ss, classify(min(si, ss) / abs(lam), good, bad))

    grid = [a * 0 + r * np.exp(1j * a) for a in angles for r in radii]
    flat = _map(cell, grid)
    cells = tuple(tuple(flat[i * len(radii):(i + 1) * len(radii)]) for i in range(len(angles)))
    ray_labels, consistent = [], []
    for row in cells:
        labels = {c.label for c in row}
        consistent.append(len(labels) == 1)
        order = ["deficient", "ill-conditioned", "injective-and-surjective"]
        ray_labels.append(min(labels, key=order.index))
    return SectorScan(angles, radii, cells, (good, bad), tuple(ray_labels), tuple(consistent))


# --------------------------------------------------------------------------
# resolvent sweeps


@dataclass(frozen=True)
class SweepSample:
    lam: complex
    inv_norm: float
    smin: float
    det_F_abs: float
    cond: float


@dataclass(frozen=True)
class RaySweepReport:
    theta0: float
    samples: tuple
    excluded: tuple  # (lam, reason)
    fitted_exponent: float
    threshold_R: float
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def rows(self) -> list:
        return [(s.lam.real, s.lam.imag, s.inv_norm, s.smin, s.det_F_abs, s.cond) for s in self.samples]


def sweep_points(theta0: float, rmin: float, rmax: float, n: int) -> np.ndarray:
    return np.logspace(np.log10(rmin), np.log10(rmax), n) * np.exp(1j * theta0)


def default_bordering(problem, space, theta0: float, strategy: str = "auto"):
    return border_family(problem, space, arc_samples(theta0, np.pi / 2, 33), "wedge", strategy=strategy)


def _threshold(samples, excluded) -> float:
    rs_bad = [abs(l) for l, _ in excluded]
    if not samples:
        return float("nan")
    if not rs_bad:
        return float(min(abs(s.lam) for s in samples))
    above = [abs(s.lam) for s in samples if abs(s.lam) > max(rs_bad)]
    return float(min(above)) if above else float("inf")


def minimal_growth_sweep(problem: ConeProblem, D: ExtensionSpec, theta0: float, rmin: float, rmax: float,
                         n: int, space: DiscreteSpace | None = None, bf=None, strategy: str = "auto",
                         lams=None, flag_rel: float = 1e-6) -> RaySweepReport:
    """Resolvent norms along ``lam = r e^{i theta0}`` via the bordered resolvent formula.

    A sample is excluded as spectrum when ``A_D - lam`` is numerically singular, i.e. its
    smallest singular value falls below ``flag_rel`` times the median over the sweep.
    """
    space = space or build_space(20.0, 512, problem.m)
    bf = bf or default_bordering(problem, space, theta0, strategy)
    op = assemble(problem, space, D, 0.0, "M")
    lams = sweep_points(theta0, rmin, rmax, n) if lams is None else np.asarray(lams, complex)

    def one(lam):
        try:
            R, Pi, red = resolvent(problem, D, bf, lam, "M", op)
        except SpectrumHit as exc:
            red = reduce_to_boundary(problem, D, bf, lam, "M", op)
            return lam, None, red, str(exc)
        return lam, R, red, None

    out = _map(one, lams)
    raw = []
    for lam, R, red, err in out:
        detF = float(abs(np.linalg.det(red.F))) if red.F.size else 1.0
        if R is None:
            raw.append((lam, np.inf, 0.0, detF, red.cond, err))
            continue
        nrm = float(np.linalg.norm(R, 2))
        raw.append((lam, nrm, 1.0 / nrm, detF, red.cond, None))
    med = np.median([r[2] for r in raw if r[2] > 0]) if any(r[2] > 0 for r in raw) else 0.0
    samples, excluded = [], []
    for lam, nrm, smin, detF, cond, err in raw:
        if err is not None or smin < flag_rel * med:
            excluded.append((complex(lam), err or f"smallest singular value {smin:.3e} below {flag_rel:g} x median"))
        else:
            samples.append(SweepSample(complex(lam), nrm, smin, detF, cond))
    samples.sort(key=lambda s: abs(s.lam))
    fit = fit_exponent([abs(s.lam) for s in samples], [s.inv_norm for s in samples])
    return RaySweepReport(theta0, tuple(samples), tuple(excluded), fit, _threshold(samples, excluded))


def direct_smin(op, lam) -> float:
    """Smallest ``L^2`` singular value of ``A_D - lam`` from the directly assembled matrix."""
    M, E = op.l2_weighted(lam)
    try:
        X = E @ np.linalg.solve(M, np.eye(M.shape[0]))
    except np.linalg.LinAlgError:
        return 0.0
    return float(1.0 / np.linalg.norm(X, 2))


@dataclass(frozen=True)
class ReductionComparison:
    lams: np.ndarray
    det_F_abs: np.ndarray
    smin: np.ndarray
    spearman: float
    flagged_F: tuple
    flagged_direct: tuple

    @property
    def same_flags(self) -> bool:
        return self.flagged_F == self.flagged_direct


def reduction_comparison(problem: ConeProblem, D: ExtensionSpec, lams, space: DiscreteSpace | None = None,
                         bf=None, flag_rel: float = 1e-6) -> ReductionComparison:
    """``|det F(lam)|`` against the smallest singular value of ``A_D - lam`` over samples."""
    from scipy.stats import spearmanr

    space = space or build_space(20.0, 512, problem.m)
    lams = np.asarray(lams, complex)
    op = assemble(problem, space, D, 0.0, "M")
    if bf is None:
        theta0 = float(np.angle(lams[len(lams) // 2]))
        bf = default_bordering(problem, space, theta0, "covering")
    dF = np.array([abs(np.linalg.det(reduce_to_boundary(problem, D, bf, l, "M", op).F)) for l in lams])
    sm = np.array([direct_smin(op, l) for l in lams])
    rho = float(spearmanr(np.log(dF + 1e-300), np.log(sm + 1e-300)).statistic)
    fF = tuple(int(i) for i in np.where(dF < flag_rel * np.median(dF))[0])
    fD = tuple(int(i) for i in np.where(sm < flag_rel * np.median(sm))[0])
    return ReductionComparison(lams, dF, sm, rho, fF, fD)


def sweep_with_eigenvalues(problem, D, theta0, rmin, rmax, n, space=None, k: int = 8) -> np.ndarray:
    """Log-spaced ray samples with the nearest ones replaced by computed eigenvalues on the ray."""
    space = space or build_space(20.0, 512, problem.m)
    op = assemble(problem, space, D, 0.0, "M")
    lams = sweep_points(theta0, rmin, rmax, n)
    ev = eigenvalues(op, k)
    direction = np.exp(1j * theta0)
    for e in ev:
        along = e / direction
        if abs(along.imag) < 1e-8 * max(1.0, abs(e)) and rmin <= along.real <= rmax:
            i = int(np.argmin(np.abs(np.abs(lams) - along.real)))
            lams[i] = along.real * direction
    return lams


# --------------------------------------------------------------------------
# model-side coefficient map


def _wedge_domain(problem, D: ExtensionSpec) -> ExtensionSpec:
    fam = conormal_family(problem)
    spec = boundary_spectrum(fam.layers[0])
    basis = domain_transfer(list(D.basis), fam, spec) if D.basis else []
    return ExtensionSpec(D.mode, tuple(basis), D.cutoff_radius)


@dataclass(frozen=True)
class SmaxReport:
    lams: np.ndarray
    q_norms: np.ndarray
    inv_norms: np.ndarray
    q_exponent: float
    inv_exponent: float
    excluded: tuple = ()


def smax_condition_check(problem: ConeProblem, D: ExtensionSpec, theta0: float, rmin: float, rmax: float,
                         n: int, space: DiscreteSpace | None = None, bf=None) -> SmaxReport:
    """``|| kappa^{-1}_{|lam|^{1/m}} q_wedge (A_wedge,D - lam)^{-1} ||`` along a ray.

    ``q_wedge`` returns the singular-function coefficients of the solution; the image is
    normed as ``|| omega * kappa^{-1} psi ||`` in the reference space.
    """
    space = space or build_space(20.0, 512, problem.m)
    m = problem.m
    Dw = _wedge_domain(problem, D)
    wedge_problem = ConeProblem(problem.m, problem.N, {k: [problem.coefficient(k, 0)] for k in range(m + 1)
                                                       if np.any(problem.coefficient(k, 0))}, 1, problem.name)
    bf = bf or default_bordering(wedge_problem, space, theta0)
    rs = np.logspace(np.log10(rmin), np.log10(rmax), n)
    # grid-compatible moduli
    rs = np.array([snap_modulus(space, r, m, warn=False)[1] ** m for r in rs])
    lams = rs * np.exp(1j * theta0)
    op = assemble(wedge_problem, space, Dw, 0.0, "wedge")
    qn, inv, excl = [], [], []
    for lam in lams:
        if not Dw.basis:
            qn.append(0.0)
            try:
                inv.append(float(np.linalg.norm(resolvent(wedge_problem, Dw, bf, lam, "wedge", op)[0], 2)))
            except SpectrumHit as exc:
                inv.append(np.inf)
                excl.append((complex(lam), str(exc)))
            continue
        try:
            R, Pi, red = resolvent(wedge_problem, Dw, bf, lam, "wedge", op)
        except SpectrumHit as exc:
            qn.append(np.inf)
            inv.append(np.inf)
            excl.append((complex(lam), str(exc)))
            continue
        FiT = np.linalg.solve(red.F, red.T) / op.row_weight
        rho = abs(lam) ** (1.0 / m)
        prof = ExtensionSpec("span", tuple(kappa_on_singular(b, 1.0 / rho, m) for b in Dw.basis),
                             Dw.cutoff_radius)
        V = assemble(wedge_problem, space, prof, 0.0, "wedge").E[:, -len(Dw.basis):]
        V = op.full_weights[:, None] * V
        qn.append(float(np.linalg.norm(V @ FiT, 2)))
        inv.append(float(np.linalg.norm(R, 2)))
    qn, inv = np.array(qn), np.array(inv)
    ok = np.isfinite(qn) & np.isfinite(inv)
    if excl:
        qe = ie = float("nan")
    else:
        qe = fit_exponent(rs[ok], qn[ok]) if np.any(qn[ok] > 0) else float("-inf")
        ie = fit_exponent(rs[ok], inv[ok])
    return SmaxReport(lams, qn, inv, qe, ie, tuple(excl))


@dataclass(frozen=True)
class FFReport:
    lams: np.ndarray
    diffs: np.ndarray
    exponent: float
    baseline: float


def f_vs_fwedge(problem: ConeProblem, D: ExtensionSpec, theta0: float, rmin: float, rmax: float, n: int,
                space: DiscreteSpace | None = None, bf=None) -> FFReport:
    """``|| F(lam) Ktilde(rho) - F_wedge(lam) K_wedge(rho) theta ||`` with ``rho = |lam|^{1/m}``.

    Both reductions use the same bordering columns; ``Ktilde(rho) = omega_rho kappa_tilde_rho``
    on the operator side and ``omega_rho kappa_rho`` on the model side.
    """
    space = space or build_space(20.0, 512, problem.m)
    m = problem.m
    fam = conormal_family(problem)
    spec = boundary_spectrum(fam.layers[0])
    bf = bf or default_bordering(problem, space, theta0)
    rs = np.logspace(np.log10(rmin), np.log10(rmax), n)
    lams = rs * np.exp(1j * theta0)
    diffs = []
    for lam in lams:
        rho = abs(lam) ** (1.0 / m)
        rc = D.cutoff_radius / rho
        kt = tuple(kappa_tilde(b, rho, fam, spec) for b in D.basis)
        kw = tuple(kappa_on_singular(domain_transfer([b], fam, spec)[0], rho, m) for b in D.basis)
        F = reduce_to_boundary(problem, ExtensionSpec("span", kt, rc), bf, lam, "M").F
        Fw = reduce_to_boundary(problem, ExtensionSpec("span", kw, rc), bf, lam, "wedge").F
        diffs.append(float(np.linalg.norm(F - Fw, 2)) if F.size else 0.0)
    diffs = np.array(diffs)
    expo = fit_exponent(rs, diffs, decades=np.log10(rmax / rmin)) if np.all(diffs > 0) else float("-inf")
    return FFReport(lams, diffs, expo, float(diffs[0]))


# --------------------------------------------------------------------------
# A_tau


@dataclass(frozen=True)
class ATauReport:
    taus: np.ndarray
    sup_ratio: np.ndarray
    probe_ratio: np.ndarray
    exponent: float
    probe_exponent: float


def _core_phi(op) -> np.ndarray:
    ev = np.kron(np.exp(op.problem.m * op.space.t), np.ones(op.N))
    return op.E[:, : op.n_core] / ev[:, None]


def smooth_probes(op, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random sums of Gaussian bumps in ``t`` (well inside the grid), as core coordinates."""
    space = op.space
    m, N = op.problem.m if hasattr(op.problem, "m") else op.problem.problem.m, op.N
    t = space.t
    Phi = _core_phi(op)
    Y = []
    for _ in range(count):
        w = np.zeros((space.G, N), dtype=complex)
        for _ in range(3):
            c = rng.uniform(-space.T + 4.0, -1.0)
            s = rng.uniform(0.3, 1.0)
            amp = rng.normal(size=N) + 1j * rng.normal(size=N)
            w += np.exp(-0.5 * ((t - c) / s) ** 2)[:, None] * amp[None, :]
        v = (np.exp(-m * t)[:, None] * w).reshape(-1)
        Y.append(Phi.conj().T @ v)
    return np.array(Y).T


def a_tau_convergence(problem: ConeProblem, taus, probe_count: int = 16, space: DiscreteSpace | None = None,
                      seed: int = 0) -> ATauReport:
    """``||(A - A_tau) u|| / ||u||_A`` on the minimal core, worst case and over random probes."""
    space = space or build_space(20.0, 512, problem.m)
    rng = np.random.default_rng(seed)
    op = assemble(problem, space, MINIMAL, 0.0, "M")
    M, E = op.l2_weighted()
    _, R = linalg.qr(np.vstack([E, M]), mode="economic")
    Y = smooth_probes(op, probe_count, rng)
    gn = np.linalg.norm(E @ Y, axis=0) + np.linalg.norm(M @ Y, axis=0)
    sup, pr = [], []
    for tau in taus:
        Mt, _ = assemble(a_tau(problem, tau), space, MINIMAL, 0.0, "M").l2_weighted()
        Dm = M - Mt
        X = linalg.solve_triangular(R.T, Dm.conj().T, lower=True).conj().T  # Dm R^{-1}
        sup.append(float(linalg.svd(X, compute_uv=False)[0]) if np.any(Dm) else 0.0)
        pr.append(float(np.max(np.linalg.norm(Dm @ Y, axis=0) / gn)))
    taus = np.asarray(taus, float)
    sup, pr = np.array(sup), np.array(pr)
    span = np.log10(taus.max() / taus.min()) if len(taus) > 1 else 1.0
    e1 = fit_exponent(taus, sup, span) if np.all(sup > 0) else float("inf")
    e2 = fit_exponent(taus, pr, span) if np.all(pr > 0) else float("inf")
    return ATauReport(taus, sup, pr, e1, e2)


# --------------------------------------------------------------------------
# index ladder and K-tilde


@dataclass(frozen=True)
class LadderRow:
    k: int
    dim_ker: int
    dim_coker: int
    index: int
    ill_separated: bool


@dataclass(frozen=True)
class IndexLadder:
    rows: tuple
    d: int
    holds: bool

    @property
    def indices(self) -> tuple:
        return tuple(r.index for r in self.rows)


def quotient_functions(problem: ConeProblem) -> list:
    """``theta^{-1}`` of the model quotient basis: representatives of ``D_max / D_min``."""
    fam = conormal_family(problem)
    spec = boundary_spectrum(fam.layers[0])
    qb = wedge_quotient_basis(spec, problem.m)
    return [theta_inverse(u, fam, spec) for u in qb.elements()]


def relative_index_ladder(problem: ConeProblem, lam_probe: complex = -1.0, space: DiscreteSpace | None = None,
                          cutoff_radius: float = 0.5) -> IndexLadder:
    space = space or build_space(20.0, 512, problem.m)
    basis = quotient_functions(problem)
    rows = []
    for k in range(len(basis) + 1):
        ext = ExtensionSpec("span", tuple(basis[:k]), cutoff_radius) if k else MINIMAL
        with warnings.catch_warnings(record=True):
            warnings.simplefilter("always")
            kc = ker_coker(assemble(problem, space, ext, lam_probe, "M"))
        rows.append(LadderRow(k, kc.dim_ker, kc.dim_coker, kc.index, kc.ill_separated))
    holds = all(r.index == rows[0].index + r.k for r in rows)
    return IndexLadder(tuple(rows), len(basis), holds)


@dataclass(frozen=True)
class KTildeReport:
    rhos: np.ndarray
    l2: np.ndarray
    graph: np.ndarray
    l2_exponent: float
    graph_exponent: float


def ktilde_estimates(problem: ConeProblem, D: ExtensionSpec, rhos, space: DiscreteSpace | None = None
                     ) -> KTildeReport:
    """Growth of ``Ktilde(rho) = omega(rho x) kappa_tilde_rho`` on the extension basis."""
    space = space or build_space(20.0, 512, problem.m)
    fam = conormal_family(problem)
    spec = boundary_spectrum(fam.layers[0])
    rhos = np.asarray(rhos, float)
    l2, gr = [], []
    for rho in rhos:
        kt = tuple(kappa_tilde(b, rho, fam, spec) for b in D.basis)
        op = assemble(problem, space, ExtensionSpec("span", kt, D.cutoff_radius / rho), 0.0, "M")
        M, E = op.l2_weighted()
        l2.append(float(np.linalg.norm(E[:, op.n_core:], 2)))
        gr.append(float(np.linalg.norm(M[:, op.n_core:], 2)))
    l2, gr = np.array(l2), np.array(gr)
    span = np.log10(rhos.max() / rhos.min())
    return KTildeReport(rhos, l2, gr, fit_exponent(rhos, l2, span), fit_exponent(rhos, gr, span))
