"""Command-line entry point.

Verbs: ``sample`` (bootstrap replicates), ``cpt`` (change-point test),
``unitroot`` (M unit-root test), ``diag`` (frequency-domain moment
diagnostics) and ``asp`` (size-power experiments). Exit status is 0 on
success, 2 on usage errors and 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .engine import MEAN_CONVENTIONS, SCHEMES, SchemeConfig, TFTBootstrap, draw_rng, with_bootstrap_mean
from .inference import changepoint_bootstrap_test, unit_root_bootstrap_test, write_replicates_csv
from .series_core import read_series
from .simlab import (
    Experiment,
    emit_asp_csv,
    experiment_manifest,
    load_experiment,
    run_asp,
    write_manifest,
    write_pvalues,
)
from .spectral import DEFAULT_BANDWIDTH, KERNEL_NAMES, Kernel, flat_top_long_run_variance


def _scheme_flags(p: argparse.ArgumentParser, schemes=SCHEMES) -> None:
    p.add_argument("--scheme", type=str.lower, default="rb", choices=[s.lower() for s in schemes])
    p.add_argument("--kernel", type=str.lower, default="bpk", choices=list(KERNEL_NAMES))
    p.add_argument("--kernel-table", metavar="PATH", help="two-column (t, K(t)) kernel file; overrides --kernel")
    p.add_argument("--h", type=float, default=DEFAULT_BANDWIDTH, help="kernel bandwidth (default %(default)s)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tftboot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("sample", help="write bootstrap replicates of a series")
    p.add_argument("--in", dest="input", required=True)
    _scheme_flags(p)
    p.add_argument("--m", type=int, help="NSWB resample length (default ceil(sqrt(T)))")
    p.add_argument("--B", type=int, default=1)
    p.add_argument("--add-mean", action="store_true", help="add a wild-bootstrap mean to each replicate")
    p.add_argument("--mean-variance-convention", choices=MEAN_CONVENTIONS, default="printed")
    p.add_argument("--out", default="-")

    for verb, text in (("cpt", "bootstrap CUSUM change-point test"), ("unitroot", "bootstrap M unit-root test")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("--in", dest="input", required=True)
        _scheme_flags(p, ("RB", "WB", "LB"))
        p.add_argument("--B", type=int, default=500)
        p.add_argument("--out", help="replicate CSV (replicate,statistic,studentizer); '-' for stdout")
        if verb == "unitroot":
            p.add_argument("--mean-variance-convention", choices=MEAN_CONVENTIONS, default="printed")

    p = sub.add_parser("diag", help="moment diagnostics of the starred coefficients")
    p.add_argument("--in", dest="input", required=True)
    _scheme_flags(p)
    p.add_argument("--B", type=int, default=1000)

    p = sub.add_parser("asp", help="achieved size-power experiment")
    p.add_argument("--config", help="key = value experiment file; flags below override it")
    p.add_argument("--test", choices=("cpt", "unitroot"))
    p.add_argument("--scheme", type=str.lower, choices=("rb", "wb", "lb"))
    p.add_argument("--kernel", type=str.lower, choices=list(KERNEL_NAMES))
    p.add_argument("--h", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--R", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--full-scale", action="store_true", help="use 1000 repetitions and 1000 bootstrap samples")
    p.add_argument("--threads", type=int, help="worker processes (default $TFT_THREADS or 1)")
    p.add_argument("--out", required=True, help="ASP CSV (nominal,size,power,R,B)")
    return parser


def _kernel(args) -> Kernel:
    if getattr(args, "kernel_table", None):
        return Kernel.from_table_file(args.kernel_table, args.h)
    return Kernel.from_name(args.kernel, args.h)


def _config(args) -> SchemeConfig:
    return SchemeConfig(args.scheme, _kernel(args), m=getattr(args, "m", None), seed=args.seed)


def _open_out(target):
    if target in (None, "-"):
        return sys.stdout, False
    return open(target, "w", newline=""), True


def _manifest(args, out) -> None:
    if out in (None, "-"):
        return
    entries = {k: v for k, v in vars(args).items()}
    entries["version"] = __version__
    write_manifest(f"{out}.manifest.json", **entries)


def cmd_sample(args) -> int:
    y = read_series(args.input)
    config = _config(args)
    boot = TFTBootstrap(y, config)
    z, _, _, _ = boot.draw_batch(args.B)
    if args.add_mean:
        tau2 = flat_top_long_run_variance(y - y.mean())
        z = np.vstack([
            with_bootstrap_mean(z[b], tau2, draw_rng(config.seed, config.replicate, b, 1), args.mean_variance_convention)
            for b in range(args.B)
        ])
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"rep{b}" for b in range(args.B)])
        for t in range(z.shape[1]):
            w.writerow([t + 1] + [repr(float(v)) for v in z[:, t]])
    finally:
        if close:
            fh.close()
    _manifest(args, args.out)
    return 0


def cmd_cpt(args) -> int:
    res = changepoint_bootstrap_test(read_series(args.input), _config(args), args.B)
    print(f"C_T {res.statistic:.10g}")
    print(f"studentized {res.studentized:.10g}")
    print(f"k_hat {res.k_hat}")
    print(f"tau2 {res.tau2:.10g}")
    print(f"bootstrap_p {res.pvalue:.10g}")
    print(f"asymptotic_p {res.asymptotic_pvalue:.10g}")
    if args.out:
        write_replicates_csv(res.replicate_rows(), args.out)
        _manifest(args, args.out)
    return 0


def cmd_unitroot(args) -> int:
    res = unit_root_bootstrap_test(
        read_series(args.input), _config(args), args.B, mean_convention=args.mean_variance_convention
    )
    s = res.statistics
    print(f"rho_hat {res.rho_hat:.10g}")
    print(f"U_T {s.U:.10g}")
    print(f"MU_T {s.MU:.10g}")
    print(f"MSB_T {s.MSB:.10g}")
    print(f"MU_MSB {s.product:.10g}")
    print(f"tau2 {res.tau2:.10g}")
    for name, p in res.pvalues.items():
        print(f"bootstrap_p_{name} {p:.10g}")
    print(f"asymptotic_p_MU {res.asymptotic_pvalue:.10g}")
    if args.out:
        write_replicates_csv(res.replicate_rows(), args.out)
        _manifest(args, args.out)
    return 0


def cmd_diag(args) -> int:
    from .engine import diagnose_meta_assumptions

    rep = diagnose_meta_assumptions(read_series(args.input), _config(args), args.B)
    print(json.dumps(rep.summary(), indent=2))
    return 0


def thread_count(explicit: int | None = None) -> int:
    """Worker count from ``--threads``, else ``$TFT_THREADS``, else 1."""
    if explicit:
        return max(1, explicit)
    return max(1, int(os.environ.get("TFT_THREADS", "1")))


def _experiment(args) -> Experiment:
    exp = load_experiment(args.config) if args.config else Experiment()
    for key in ("test", "scheme", "kernel", "h", "T", "R", "B", "seed"):
        val = getattr(args, key)
        if val is not None:
            setattr(exp, key, val)
    if args.full_scale:
        exp.full_scale = True
    return exp


def cmd_asp(args) -> int:
    exp = _experiment(args)
    spec0, spec1 = exp.specs()
    R, B = exp.counts()
    threads = thread_count(args.threads)
    kwargs = dict(T=exp.T, R=R, B=B, seed=exp.seed, mean_convention=exp.mean_convention)
    if threads == 1:
        curve = run_asp(spec0, spec1, exp.test, exp.scheme_config(), **kwargs)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, R // (4 * threads))
            curve = run_asp(
                spec0,
                spec1,
                exp.test,
                exp.scheme_config(),
                map_fn=lambda f, jobs: pool.map(f, jobs, chunksize=chunk),
                **kwargs,
            )
    emit_asp_csv(curve, args.out)
    write_pvalues(f"{args.out}.pvalues.csv", curve.pvalues_h0, curve.pvalues_h1)
    write_manifest(f"{args.out}.manifest.json", version=__version__, **experiment_manifest(exp))
    size, power = curve.at(0.05)
    print(f"size@0.05 {size:.6g}")
    print(f"power@0.05 {power:.6g}")
    return 0


COMMANDS = {"sample": cmd_sample, "cpt": cmd_cpt, "unitroot": cmd_unitroot, "diag": cmd_diag, "asp": cmd_asp}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.verb](args)
    except (OSError, ValueError) as exc:
        print(f"tftboot {args.verb}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
