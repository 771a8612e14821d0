"""Command line entry point.

    glatais run --config exp.json --mode obs-sweep --out results/
    glatais demo [--config exp.json] [--rep 0] [--R 100] [--P 3000]
    glatais validate-config exp.json

Exit status is 0 on success, 1 for a bad configuration and 2 when the run
itself fails.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .errors import GlataisError, ParameterError
from .evaluation import EdgeSet, f_score, support_from_precision
from .gl_atais import run
from .harness import (
    MODES,
    ExperimentConfig,
    method_rng,
    results_csv,
    run_repetition,
    run_sweep,
    simulate,
    summary_csv,
    svg_chart,
)
from .mean_model import benchmark_model

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _ConfigError(Exception):
    pass


def _load_config(path):
    if path is None:
        return ExperimentConfig.desk()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        return ExperimentConfig.from_json(text)
    except ParameterError as exc:
        raise _ConfigError(f"{path}: {exc}") from None


def _cmd_run(args):
    cfg = _load_config(args.config)
    if args.workers is not None:
        try:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "workers": args.workers})
        except ParameterError as exc:
            raise _ConfigError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = run_sweep(cfg, args.mode)
    summary = table.summary()
    (out / "results.csv").write_text(results_csv(table.rows))
    (out / "summary.csv").write_text(summary_csv(summary))
    (out / "figure.svg").write_text(svg_chart(summary, table.grid) if summary else "")
    failed = sum(1 for r in table.rows if r.error)
    print(f"{len(table.rows)} rows ({failed} failed) written to {out}")
    for s in summary:
        print(f"  {s.method:12s} {table.grid}={s.grid_value:<6d} mean={s.mean:.3f} stderr={s.stderr:.3f}")
    return EXIT_OK


def _cmd_demo(args):
    cfg = _load_config(args.config)
    R = args.R if args.R is not None else cfg.fixed_R
    P = args.P if args.P is not None else cfg.fixed_P
    if not 0 <= args.rep < cfg.reps:
        raise _ConfigError(f"--rep must lie in [0, {cfg.reps})")
    if R < 2 or P < 1:
        raise _ConfigError("need R >= 2 and P >= 1")
    model = benchmark_model()
    data = simulate(cfg, args.rep, R, model)
    truth = EdgeSet.from_graph(data.graph)
    np.set_printoptions(precision=4, suppress=True)
    print(f"kernels: {kernels.BACKEND}")
    print(f"rep {args.rep}: seed {data.seed}, R={R}, P={P}, lambda={cfg.lam}, data {data.digest}")
    print(f"true edges ({len(truth.edges)}): {sorted(truth.edges)}")
    print(f"phi_true: {data.phi_true}")

    theta, phi_map, trace = run(data.obs, model, cfg.gl_atais_config(P),
                                method_rng(cfg.seed, args.rep, "gl-atais"))
    print(f"start: log-posterior {trace.initial_value:.4f}")
    for k, it in enumerate(trace.iterations):
        tag = "warm-up" if it.warmup else "       "
        mark = "accept" if it.accepted else "reject"
        edges = len(support_from_precision(it.theta_hat, cfg.threshold_spec()).edges)
        print(f"iter {k:3d} {tag} candidate {it.candidate_value:14.4f} {mark} "
              f"best {it.value:14.4f} ess {it.ess:9.2f} edges {edges:3d}")
    est = support_from_precision(theta, cfg.threshold_spec())
    print(f"phi_map: {phi_map}")
    print(f"estimated edges ({len(est.edges)}): {sorted(est.edges)}")
    print(f"gl-atais F-score: {f_score(est, truth):.4f}")

    print("all methods on the same data:")
    for row in run_repetition(cfg, args.rep, R, P, model):
        score = "-" if row.f_score is None else f"{row.f_score:.4f}"
        extra = f" ({row.error})" if row.error else ""
        print(f"  {row.method:12s} F={score}{extra}")
    return EXIT_OK


def _cmd_validate(args):
    cfg = _load_config(args.config)
    print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="glatais", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sweep and write results.csv, summary.csv, figure.svg")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--mode", required=True, choices=sorted(MODES))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, help="override the worker process count")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("demo", help="one repetition with a per-iteration trace")
    p.add_argument("--config", help="JSON experiment config (desk defaults if omitted)")
    p.add_argument("--rep", type=int, default=0)
    p.add_argument("--R", type=int, help="observations (default: config fixed_R)")
    p.add_argument("--P", type=int, help="particles (default: config fixed_P)")
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("validate-config", help="check a config and print it with defaults filled in")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; those are configuration problems here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GlataisError, OSError, np.linalg.LinAlgError) as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
