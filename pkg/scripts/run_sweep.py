"""Largest-cycle fraction across a grid of beta values on H(2, n)."""
import argparse

from cycleforge.experiments import manifest, sweep, sweep_csv, sweep_means, write_outputs

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--n", type=int, default=60)
ap.add_argument("--theta", type=float, default=1.0)
ap.add_argument("--betas", default="0.2,0.3,0.4,0.5,0.6,0.8,1.0")
ap.add_argument("--replicates", type=int, default=30)
ap.add_argument("--sampler", choices=["poisson", "mcmc"], default="poisson")
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--out", default="sweep.csv")
a = ap.parse_args()

betas = [float(b) for b in a.betas.split(",")]
recs = sweep(a.n, a.theta, betas, a.replicates, a.sampler, a.seed)
write_outputs(a.out, sweep_csv(recs), manifest("sweep", vars(a), a.seed))
for beta, m in sweep_means(recs).items():
    print(f"beta={beta:<6} mean max-cycle fraction {m:.4f}")
