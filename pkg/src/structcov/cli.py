# Command-line front end: `estimate` runs the TSVD on a sample dump,
# `crb` evaluates the bound for a scenario config, `bench` drives the
# Monte-Carlo experiments. Exit code 2 flags configuration errors.

import argparse
import sys

import numpy as np

from . import bench, crb, sampling, tsvd
from .matspace import mat, vech


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="structcov",
        description="Joint covariance estimation with a shared low-dimensional structure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="run the TSVD estimator on a sample dump")
    est.add_argument("--input", required=True, help="samples CSV (group,sample_index,component_1..p)")
    est.add_argument(
        "--rank",
        required=True,
        help="rank rule: known:R | alpha | alpha:VALUE | aoht | aoht-c | elbow | elbow-c",
    )
    est.add_argument("--psd-clip", action="store_true", help="clip negative eigenvalues of each estimate")
    est.add_argument("--out", default="-", help="output CSV path (default stdout)")

    crb_p = sub.add_parser("crb", help="evaluate the trace bound for a scenario")
    crb_p.add_argument("--scenario", required=True, help="scenario config (INI: p,K,n,structure,seed)")
    crb_p.add_argument("--n", type=int, required=True, help="samples per group")
    crb_p.add_argument("--out", default="-", help="output CSV path (default stdout)")

    bench_p = sub.add_parser("bench", help="run a Monte-Carlo experiment")
    bench_p.add_argument(
        "experiment", choices=["mse-vs-n", "thresholds", "mse-vs-k", "tracking"]
    )
    bench_p.add_argument("--config", help="experiment config INI file")
    bench_p.add_argument("--out", required=True, help="output CSV path")
    bench_p.add_argument("--ranks-out", help="rank-histogram CSV (thresholds; default <out>_ranks.csv)")
    bench_p.add_argument("--seed", type=int, help="master seed override")
    bench_p.add_argument("--trials", type=int, help="Monte-Carlo trials override")
    bench_p.add_argument("--jobs", type=int, default=1, help="worker processes")
    bench_p.add_argument(
        "--fix-scenario",
        action="store_true",
        help="share one scenario draw across trials (required for a meaningful CRB overlay)",
    )
    return parser


def _open_out(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _cmd_estimate(args):
    groups = sampling.read_samples_csv(args.input)
    n = groups[0].shape[1]
    S = np.column_stack([vech(sampling.scm(X)) for X in groups])
    rule, _, arg = args.rank.partition(":")
    known_r = None
    alpha = None
    if rule == "known":
        if not arg:
            raise bench.ConfigError("rank rule known needs a value, e.g. known:9")
        known_r = int(arg)
    elif rule == "alpha" and arg:
        alpha = float(arg)
    elif rule not in tsvd.RANK_RULES:
        raise bench.ConfigError(f"unknown rank rule {args.rank!r}")
    est = tsvd.estimate(S, rule, known_r=known_r, n=n, alpha=alpha)
    Yout = tsvd.psd_clip(est) if args.psd_clip else est.Yhat

    fh, close = _open_out(args.out)
    try:
        sigma = ",".join(f"{x:.12g}" for x in est.sigma)
        alpha_txt = "" if est.alpha is None else f"{est.alpha:.12g}"
        fh.write(f"# r_used={est.r_used}, alpha={alpha_txt}, sigma={sigma}\n")
        for k in range(Yout.shape[1]):
            Q = mat(Yout[:, k])
            for row in Q:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    finally:
        if close:
            fh.close()
    return 0


def _scenario_from_config(cfg):
    from .structures import parse_structure

    structure = cfg["structure"].strip().lower()
    if structure == "toeplitz":
        return sampling.toeplitz_scenario(cfg["p"], cfg["K"], cfg["seed"])
    model = parse_structure(structure, cfg["p"])
    return sampling.structured_scenario(model, cfg["K"], cfg["seed"])


def _cmd_crb(args):
    cfg = sampling.load_scenario_config(args.scenario)
    scenario = _scenario_from_config(cfg)
    report = crb.crb_report(scenario, args.n)
    fh, close = _open_out(args.out)
    try:
        fh.write("l,r,K,n,rank_theory,rank_numeric,trace_bound,floor,marginal\n")
        fh.write(
            f"{report.l},{report.r},{report.K},{report.n},"
            f"{report.jacobian_rank_theory},{report.jacobian_rank_numeric},"
            f"{float(report.trace_bound)!r},{float(report.floor)!r},"
            f"{float(report.marginal_per_matrix)!r}\n"
        )
    finally:
        if close:
            fh.close()
    return 0


def _cmd_bench(args):
    experiment = args.experiment.replace("-", "_")
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "jobs": args.jobs,
        "fix_scenario": True if args.fix_scenario else None,
    }
    if args.config:
        cfg = bench.load_experiment_config(args.config, experiment=experiment, **overrides)
    else:
        cfg = bench.ExperimentConfig(
            experiment=experiment,
            **{k: v for k, v in overrides.items() if v is not None},
        )
    records, rank_records = bench.run_experiment(cfg)
    bench.emit_csv(records, args.out)
    if rank_records:
        ranks_out = args.ranks_out
        if not ranks_out:
            stem, dot, ext = args.out.rpartition(".")
            ranks_out = f"{stem}_ranks.{ext}" if dot else f"{args.out}_ranks"
        bench.emit_rank_csv(rank_records, ranks_out)
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "crb":
            return _cmd_crb(args)
        return _cmd_bench(args)
    except (bench.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
