"""Disk-Laplacian spectra on the log grid against Bessel zeros, for several grid sizes."""
import argparse
from pathlib import Path
import warnings

import numpy as np
from scipy import special

from conewedge import MINIMAL, assemble, build_space, eigenvalues, load_extension, validate_problem

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--grids", type=int, nargs="+", default=[128, 256, 512, 1024])
ap.add_argument("--T", type=float, default=20.0)
ap.add_argument("--k", type=int, default=3)
args = ap.parse_args()
warnings.simplefilter("ignore")

data = Path(__file__).resolve().parent.parent / "data"
cases = [("l=0 Friedrichs", "cl2_l0.json", 0, load_extension(data / "friedrichs.json", 1)),
         ("l=2 Dirichlet", "cl2_l2.json", 2, MINIMAL)]
print(f"{'case':16s} {'G':>5s}  " + "  ".join(f"rel err {i}" for i in range(1, args.k + 1)))
for label, fname, order, ext in cases:
    problem = validate_problem(data / fname)
    want = special.jn_zeros(order, args.k) ** 2
    for G in args.grids:
        op = assemble(problem, build_space(args.T, G, 2), ext)
        ev = np.sort(eigenvalues(op, args.k).real)
        print(f"{label:16s} {G:5d}  " + "  ".join(f"{e:10.2e}" for e in np.abs(ev - want) / want))
