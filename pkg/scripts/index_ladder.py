"""Relative index ladder D_min, D, D_max for the bundled problems at two grid sizes."""
import warnings
from pathlib import Path

from conewedge import build_space, relative_index_ladder, validate_problem

warnings.simplefilter("ignore")
data = Path(__file__).resolve().parent.parent / "data"
for name in ("cl2_l0", "pb"):
    problem = validate_problem(data / f"{name}.json")
    for G in (256, 512):
        L = relative_index_ladder(problem, space=build_space(20.0, G, 2))
        print(f"{name:7s} G={G:4d}  indices {L.indices}  {'holds' if L.holds else 'broken'}")
