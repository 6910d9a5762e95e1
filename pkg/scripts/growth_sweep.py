"""Resolvent growth along rays for the Friedrichs disk Laplacian; prints the fitted exponent per ray."""
import argparse
import warnings
from pathlib import Path

import numpy as np

from conewedge import build_space, load_extension, minimal_growth_sweep, validate_problem

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--rays", type=float, nargs="+", default=[90.0, 135.0, 180.0, 225.0])
ap.add_argument("--rmax", type=float, default=1e4)
ap.add_argument("--samples", type=int, default=24)
ap.add_argument("--G", type=int, default=512)
args = ap.parse_args()
warnings.simplefilter("ignore")

data = Path(__file__).resolve().parent.parent / "data"
problem = validate_problem(data / "cl2_l0.json")
ext = load_extension(data / "friedrichs.json", 1)
space = build_space(20.0, args.G, 2)
for deg in args.rays:
    rep = minimal_growth_sweep(problem, ext, np.deg2rad(deg), 1.0, args.rmax, args.samples, space)
    print(f"ray {deg:6.1f} deg  exponent {rep.fitted_exponent:+.4f}  excluded {len(rep.excluded)}")
