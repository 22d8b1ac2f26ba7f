"""Largest cycle size against n in the subcritical regime."""
import argparse
import json

from cycleforge.experiments import manifest, subcritical_scaling, write_outputs

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--theta", type=float, default=1.0)
ap.add_argument("--beta", type=float, default=0.2)
ap.add_argument("--ns", default="30,60,90,120")
ap.add_argument("--replicates", type=int, default=50)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--out", default="scaling.json")
a = ap.parse_args()

fit = subcritical_scaling(a.theta, a.beta, [int(n) for n in a.ns.split(",")], a.replicates, a.seed)
out = {"ns": fit.ns, "maxima": fit.maxima, "ratios": fit.ratios,
       "slope_vs_log_n": fit.slope, "intercept": fit.intercept}
write_outputs(a.out, json.dumps(out, indent=2) + "\n", manifest("scaling", vars(a), a.seed))
for n, m, r in zip(fit.ns, fit.maxima, fit.ratios):
    print(f"n={n:<5} max cycle {m:<5} max/n {r:.3f}")
