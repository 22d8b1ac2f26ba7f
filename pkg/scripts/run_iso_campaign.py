"""Isoperimetric profile of CRW traces, with a log^2 n versus n fit."""
import argparse
import json

from cycleforge.experiments import crw_iso_campaign, fit_against_log2, manifest, write_outputs

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--ns", default="16,32,64")
ap.add_argument("--beta", type=float, default=1.0)
ap.add_argument("--theta", type=float, default=1.0)
ap.add_argument("--replicates", type=int, default=10)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--out", default="iso.json")
a = ap.parse_args()

rows = []
for n in (int(x) for x in a.ns.split(",")):
    c = crw_iso_campaign(n, a.beta, a.theta, replicates=a.replicates, seed=a.seed)
    rows.append({"n": n, "horizon": c.horizon, "iota_max": max(c.iota_max), "C_hat": c.C_hat,
                 "excluded": c.excluded})
    print(f"n={n:<5} iota_max {max(c.iota_max):<8} C_hat {c.C_hat:.3f}")
s_log, s_lin = fit_against_log2([r["n"] for r in rows], [r["iota_max"] for r in rows])
print(f"slope vs log^2 n {s_log:.3f}, slope vs n {s_lin:.3f}")
out = {"rows": rows, "slope_vs_log2_n": s_log, "slope_vs_n": s_lin}
write_outputs(a.out, json.dumps(out, indent=2) + "\n", manifest("iso", vars(a), a.seed))
