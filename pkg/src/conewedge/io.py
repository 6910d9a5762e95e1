"""Problem and extension files, validation, run configuration and report writers."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .discrete import ExtensionSpec
from .mellin import ConeProblem


class ValidationError(ValueError):
    """Carries every problem found in an input file, not only the first."""

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


# --------------------------------------------------------------------------
# parsing helpers


def load_json(path) -> object:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"])


def parse_complex(z, where: str, errors: list) -> complex:
    if isinstance(z, (int, float)) and not isinstance(z, bool):
        return complex(z)
    if isinstance(z, list) and len(z) == 2 and all(isinstance(v, (int, float)) for v in z):
        return complex(z[0], z[1])
    errors.append(f"{where}: expected [re, im], got {z!r}")
    return 0j


def parse_matrix(a, N: int, where: str, errors: list) -> np.ndarray:
    out = np.zeros((N, N), dtype=complex)
    if not isinstance(a, list) or len(a) != N:
        errors.append(f"{where}: expected {N} rows")
        return out
    for i, row in enumerate(a):
        if not isinstance(row, list) or len(row) != N:
            errors.append(f"{where}[{i}]: expected {N} entries")
            continue
        for j, z in enumerate(row):
            out[i, j] = parse_complex(z, f"{where}[{i}][{j}]", errors)
    return out


def complex_pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def matrix_json(a: np.ndarray) -> list:
    return [[complex_pair(z) for z in row] for row in np.atleast_2d(a)]


# --------------------------------------------------------------------------
# problems


def problem_from_json(obj) -> ConeProblem:
    """Build a problem, enumerating every schema and ellipticity error."""
    errors = []
    if not isinstance(obj, dict):
        raise ValidationError(["top level: expected an object"])
    for key in ("name", "order", "cross_dim", "taylor_depth", "coefficients"):
        if key not in obj:
            errors.append(f"missing field {key!r}")
    m, N = obj.get("order"), obj.get("cross_dim")
    depth = obj.get("taylor_depth", 1)
    if "order" in obj and (not isinstance(m, int) or m < 1):
        errors.append("order: expected a positive integer")
    if "cross_dim" in obj and (not isinstance(N, int) or N < 1):
        errors.append("cross_dim: expected a positive integer")
    if not isinstance(depth, int) or depth < 1:
        errors.append("taylor_depth: expected a positive integer")
    coeffs = {}
    raw = obj.get("coefficients", [])
    if not isinstance(raw, list):
        errors.append("coefficients: expected a list")
        raw = []
    shapes_ok = isinstance(m, int) and m >= 1 and isinstance(N, int) and N >= 1
    for i, c in enumerate(raw):
        where = f"coefficients[{i}]"
        if not isinstance(c, dict) or "k" not in c or "taylor" not in c:
            errors.append(f"{where}: expected fields 'k' and 'taylor'")
            continue
        k = c["k"]
        if not isinstance(k, int) or (shapes_ok and not 0 <= k <= m):
            errors.append(f"{where}.k: expected an integer in 0..order")
            continue
        if k in coeffs:
            errors.append(f"{where}.k: duplicate coefficient index {k}")
            continue
        if not isinstance(c["taylor"], list):
            errors.append(f"{where}.taylor: expected a list of matrices")
            continue
        if shapes_ok:
            coeffs[k] = [parse_matrix(a, N, f"{where}.taylor[{j}]", errors) for j, a in enumerate(c["taylor"])]
    if shapes_ok:
        lead = coeffs.get(m)
        if not lead:
            errors.append("order coefficient absent")
        elif np.linalg.cond(lead[0]) > 1e12:
            errors.append("not c-elliptic at tip")
    if errors:
        raise ValidationError(errors)
    return ConeProblem(m, N, coeffs, depth, str(obj.get("name", "")))


def validate_problem(path) -> ConeProblem:
    """Load and check a problem file; raises :class:`ValidationError` listing all errors."""
    return problem_from_json(load_json(path))


def problem_to_json(problem: ConeProblem) -> dict:
    return {
        "name": problem.name,
        "order": problem.m,
        "cross_dim": problem.N,
        "taylor_depth": problem.taylor_depth,
        "coefficients": [{"k": k, "taylor": [matrix_json(a) for a in t]} for k, t in sorted(problem.coeffs.items())],
    }


def load_extension(path, N: int | None = None) -> ExtensionSpec:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise ValidationError([f"{path}: expected an object"])
    errors = []
    mode = obj.get("mode")
    if mode not in ("minimal", "maximal", "span"):
        errors.append(f"mode: expected minimal, maximal or span, got {mode!r}")
    if not isinstance(obj.get("basis", []), list):
        errors.append("basis: expected a list")
    r = obj.get("cutoff_radius", 0.5)
    if not isinstance(r, (int, float)) or not 0 < r <= 1:
        errors.append("cutoff_radius: expected a number in (0, 1]")
    if errors:
        raise ValidationError(errors)
    try:
        return ExtensionSpec.from_json(obj, N)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError([f"basis: {exc}"])


# --------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem_path: str
    extension_path: str | None = None
    theta0_deg: float = 180.0
    aperture_deg: float = 90.0
    r_min: float = 1.0
    r_max: float = 1e4
    samples: int = 40
    T: float = 20.0
    G: int = 512
    rank_tol: float = 1e-7
    cluster_tol: float = 1e-8
    output: str | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        errors = []
        if not self.r_min < self.r_max:
            errors.append("r_min must be smaller than r_max")
        if self.r_min <= 0:
            errors.append("r_min must be positive")
        if self.samples < 8:
            errors.append("samples must be at least 8")
        if self.G < 16 or self.T <= 0:
            errors.append("grid needs G >= 16 and T > 0")
        if errors:
            raise ValidationError(errors)
        a = float(self.theta0_deg) % 360.0
        object.__setattr__(self, "theta0_deg", 0.0 if a == 360.0 else a)

    @property
    def theta0(self) -> float:
        return float(np.deg2rad(self.theta0_deg))

    @property
    def aperture(self) -> float:
        return float(np.deg2rad(self.aperture_deg))

    def to_json(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# reports

SWEEP_COLUMNS = ("lambda_re", "lambda_im", "inv_norm", "smin", "det_F_abs", "cond")


def write_sweep_csv(target, rows) -> None:
    """Write sweep rows to a path or an open text stream."""
    if hasattr(target, "write"):
        w = csv.writer(target, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
        return
    with open(target, "w", newline="", encoding="utf-8") as fh:
        write_sweep_csv(fh, rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_pair(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)
