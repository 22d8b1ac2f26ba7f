"""Epoch-by-epoch split-merge bookkeeping driven by uniform random transpositions."""
import argparse

import numpy as np

from cycleforge.experiments import manifest, write_outputs
from cycleforge.graph import complete, hamming
from cycleforge.splitmerge import epoch_schedule, random_edge_stream, run_split_merge, transposition_driver

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--n", type=int, default=32)
ap.add_argument("--mode", choices=["hamming", "complete"], default="hamming")
ap.add_argument("--j", type=int, default=0)
ap.add_argument("--delta", type=float, default=1.0)
ap.add_argument("--eps", type=float, default=0.1)
ap.add_argument("--c2", type=float, default=1.0)
ap.add_argument("--c3", type=float, default=None)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--out", default="splitmerge.csv")
a = ap.parse_args()

g = hamming(a.n) if a.mode == "hamming" else complete(a.n)
N = g.num_vertices
sch = epoch_schedule(N, a.j, a.delta, a.c2, a.c3, a.eps)
drv = transposition_driver(random_edge_stream(g, np.random.default_rng(a.seed)), N)
log = run_split_merge(drv, N, sch, verify=True)
write_outputs(a.out, log.csv(), manifest("splitmerge", vars(a), a.seed))
print(log.csv(), end="")
print(f"schedule total {sch.total} vs delta_t {sch.delta_t:.1f} (fits: {sch.fits_interval})")
