"""Command line interface: ``cycleforge <subcommand> [flags]``.

Each subcommand writes a JSON manifest (subcommand, parameters, seed,
outputs, version) before its output.  ``cycleforge replay MANIFEST`` reruns
the recorded invocation.  Usage errors exit with status 1, parameters
outside an experiment's regime with status 2.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .config import dumps, load, permutation_of, sample_poisson
from .crw import classify_jumps, events_csv, run as run_crw
from .experiments import (RegimeError, crw_iso_campaign, heisenberg_correlation,
                          subcritical_scaling, sweep, sweep_csv)
from .graph import HammingGraph
from .mcmc import exact_distribution, mcmc_sample
from .permutation import cycle_stats_record
from .splitmerge import (bernoulli_percolation, epoch_schedule, random_edge_stream,
                         run_split_merge, transposition_driver)
from .svg import render_svg


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    vals = [float(t) for t in text.split(",") if t.strip()]
    return vals


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _graph(args) -> HammingGraph:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    return HammingGraph(args.n, args.mode)


# -- subcommands: each returns the output text ------------------------------------------

def cmd_sample(args) -> str:
    g = _graph(args)
    x = sample_poisson(g, args.beta, np.random.default_rng(args.seed))
    if args.format == "json":
        rec = cycle_stats_record(permutation_of(x), g.n, args.beta, 1.0, args.seed)
        return json.dumps(rec) + "\n"
    if args.format == "svg":
        return render_svg(x)
    return dumps(x)


def cmd_mcmc(args) -> str:
    g = _graph(args)
    rng = np.random.default_rng(args.seed)
    samples = mcmc_sample(g, args.beta, args.theta, args.weight, args.sweeps,
                          args.burn_in, args.thin, rng)
    if args.format == "txt":
        return "".join(dumps(x) for x in samples)
    recs = [cycle_stats_record(permutation_of(x), g.n, args.beta, args.theta, args.seed)
            for x in samples]
    if args.format == "json":
        return json.dumps(recs) + "\n"
    lines = ["sample,num_cycles,max_cycle"]
    lines += [f"{i},{len(r['cycle_lengths_desc'])},{r['max_cycle']}" for i, r in enumerate(recs)]
    return "\n".join(lines) + "\n"


def cmd_crw(args) -> str:
    if args.config:
        x = load(args.config)
    else:
        x = sample_poisson(_graph(args), args.beta, np.random.default_rng(args.seed))
    if not 0 <= args.vertex < x.graph.num_vertices:
        raise UsageError(f"--vertex must lie in [0, {x.graph.num_vertices})")
    tr = run_crw(x, args.vertex, args.horizon)
    if args.format == "svg":
        return render_svg(x, tr, only_visited=x.graph.num_vertices > 20)
    if args.format == "json":
        summary = {"start": tr.start, "closed": tr.closed,
                   "tau_c": tr.tau_c if tr.closed else None, "end_time": tr.end_time,
                   "orbit": tr.orbit, "discovered": tr.discovered, **classify_jumps(tr)}
        return json.dumps(summary) + "\n"
    return events_csv(tr)


def cmd_sweep(args) -> str:
    betas = _floats(args.betas)
    if not betas:
        raise UsageError("--betas must list at least one value")
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    recs = sweep(args.n, args.theta, betas, args.replicates, args.sampler, args.seed,
                 args.weight)
    return sweep_csv(recs)


def cmd_scaling(args) -> str:
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    fit = subcritical_scaling(args.theta, args.beta, _ints(args.ns), args.replicates, args.seed)
    return json.dumps({"ns": fit.ns, "maxima": fit.maxima, "ratios": fit.ratios,
                       "slope_vs_log_n": fit.slope, "intercept": fit.intercept}) + "\n"


def cmd_heisenberg(args) -> str:
    c = heisenberg_correlation(args.n, args.beta, args.u, args.v, args.sweeps, args.seed,
                               burn_in=args.burn_in, thin=args.thin)
    return json.dumps({"estimate": c.estimate, "ci": [c.low, c.high],
                       "hits": c.hits, "samples": c.samples}) + "\n"


def cmd_iso(args) -> str:
    camp = crw_iso_campaign(args.n, args.beta, args.theta, args.horizon, args.replicates,
                            args.seed)
    return json.dumps({"horizon": camp.horizon, "iota_max": camp.iota_max,
                       "C_hat": camp.C_hat, "c_hat": None if math.isnan(camp.c_hat) else camp.c_hat,
                       "chi_min": min(camp.chi_values, default=None),
                       "excluded": camp.excluded}) + "\n"


def cmd_percolation(args) -> str:
    g = _graph(args)
    p = args.p if args.p is not None else args.lam / (g.n - 1)
    if not 0 <= p <= 1:
        raise UsageError("edge probability must lie in [0, 1]")
    lines = ["replicate,largest,fraction,components"]
    for r in range(args.replicates):
        rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(r,)))
        sizes = bernoulli_percolation(g, p, rng)
        lines.append(f"{r},{sizes[0]},{sizes[0] / g.num_vertices!r},{len(sizes)}")
    return "\n".join(lines) + "\n"


def cmd_splitmerge(args) -> str:
    g = _graph(args)
    try:
        sch = epoch_schedule(g.num_vertices, args.j, args.delta, args.c2, args.c3, args.eps)
    except ValueError as e:
        raise RegimeError(str(e)) from None
    drv = transposition_driver(random_edge_stream(g, np.random.default_rng(args.seed)),
                               g.num_vertices)
    return run_split_merge(drv, g.num_vertices, sch).csv()


def cmd_oracle(args) -> str:
    g = _graph(args)
    if g.num_vertices > 6:
        raise RegimeError("exact enumeration is limited to at most 6 vertices")
    d = exact_distribution(g, args.beta, args.theta, args.kmax, args.weight, max_tail=None)
    if d.poisson_tail > 1e-6:
        print(f"cycleforge: warning: truncation mass {d.poisson_tail:.3g} exceeds 1e-6; "
              "raise --kmax", file=sys.stderr)
    dist = sorted(d.probs.items())
    return json.dumps({"k_max": d.k_max, "truncation_mass": d.poisson_tail,
                       "truncation_bound": d.tail_bound,
                       "distribution": [{"sigma": list(k), "prob": v} for k, v in dist]},
                      indent=1) + "\n"


COMMANDS = {"sample": cmd_sample, "mcmc": cmd_mcmc, "crw": cmd_crw, "sweep": cmd_sweep,
            "scaling": cmd_scaling, "heisenberg": cmd_heisenberg, "iso": cmd_iso,
            "percolation": cmd_percolation, "splitmerge": cmd_splitmerge, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cycleforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help, fmt=("csv",), **defaults):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--n", type=int, default=defaults.get("n", 10))
        sp.add_argument("--mode", choices=["hamming2", "complete"], default="hamming2")
        sp.add_argument("--beta", type=float, default=defaults.get("beta", 0.5))
        sp.add_argument("--theta", type=float, default=defaults.get("theta", 1.0))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--replicates", type=int, default=defaults.get("replicates", 30))
        sp.add_argument("--horizon", type=float, default=None)
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--format", choices=fmt, default=fmt[0])
        sp.add_argument("--weight", default="cycles")
        return sp

    add("sample", "Poisson bridge configuration (theta = 1)", ("txt", "json", "svg"))
    sp = add("mcmc", "tilted configurations by Metropolis-Hastings", ("txt", "csv", "json"),
             theta=2.0)
    sp.add_argument("--sweeps", type=int, default=100, help="retained samples")
    sp.add_argument("--burn-in", type=int, default=None, help="accepted moves discarded")
    sp.add_argument("--thin", type=int, default=None, help="proposals between samples")
    sp = add("crw", "cyclic random walk event log or diagram", ("csv", "json", "svg"))
    sp.add_argument("--vertex", type=int, default=0)
    sp.add_argument("--config", default=None, help="configuration file from `sample`")
    sp = add("sweep", "largest-cycle statistics over a beta grid", n=60)
    sp.add_argument("--betas", default="0.2,0.3,0.4,0.5,0.6,0.8,1.0")
    sp.add_argument("--sampler", choices=["poisson", "mcmc"], default="poisson")
    sp = add("scaling", "subcritical largest cycle against log n", ("json",), beta=0.2,
             replicates=50)
    sp.add_argument("--ns", default="30,60,90,120")
    sp = add("heisenberg", "spin correlation at theta = 2", ("json",), n=3, theta=2.0)
    sp.add_argument("--u", type=int, default=0)
    sp.add_argument("--v", type=int, default=1)
    sp.add_argument("--sweeps", type=int, default=1000, help="retained samples")
    sp.add_argument("--burn-in", type=int, default=None)
    sp.add_argument("--thin", type=int, default=None)
    add("iso", "isoperimetry of CRW traces and orbit segments", ("json",), n=12, beta=1.0,
        replicates=5)
    sp = add("percolation", "Bernoulli bond percolation component sizes", n=80)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--p", type=float, default=None)
    group.add_argument("--lam", type=float, default=1.0, help="p = lam / (n - 1)")
    sp = add("splitmerge", "epoch instrumentation of the transposition process", n=20)
    sp.add_argument("--j", type=int, default=0)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--c2", type=float, default=1.0)
    sp.add_argument("--c3", type=float, default=None)
    sp = add("oracle", "exact law of sigma(X) on a tiny graph", ("json",), n=2, theta=2.0)
    sp.add_argument("--kmax", type=int, default=8)
    rp = sub.add_parser("replay", help="rerun the invocation recorded in a manifest")
    rp.add_argument("manifest")
    return p


def make_manifest(args, argv: list[str]) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    return {"subcommand": args.command, "params": params, "argv": argv, "seed": args.seed,
            "outputs": [args.out] if args.out else [], "version": __version__}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        try:
            with open(args.manifest) as fh:
                argv = json.load(fh)["argv"]
        except (OSError, KeyError, ValueError) as e:
            print(f"cycleforge: cannot read manifest: {e}", file=sys.stderr)
            return 1
        args = parser.parse_args(argv)
    meta = make_manifest(args, argv)
    try:
        if args.out:
            with open(args.out + ".manifest.json", "w") as fh:
                json.dump(meta, fh, indent=2)
                fh.write("\n")
        text = COMMANDS[args.command](args)
    except RegimeError as e:
        print(f"cycleforge: regime violation: {e}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, IndexError, OSError) as e:
        print(f"cycleforge: error: {e}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(json.dumps(meta, indent=2))
    else:
        print(json.dumps(meta), file=sys.stderr)
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
