"""Command-line entry point: ``generate``, ``encode``, ``sweep``, ``grid``, ``stability``.

Exit status is 0 on success, 2 for configuration or usage errors and 3 for
failures while running.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from ._rng import child_seeds
from .bench import emit_outputs, grid_search_constant, run_sweep, summary_csv
from .config import ConfigError, ExperimentConfig, load_config
from .decimation import EncoderConfig, encode
from .graphs import GraphError, build_irregular, build_semi_regular, load_graph, save_graph
from .schedule import SCHEDULE_KINDS, Schedule
from .stability import STABILITY_FIELDS, stability_table, write_stability_csv

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("ldgm_bpgd")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_ensemble(p):
    p.add_argument("--ensemble", choices=("irregular", "semi_regular"), default="irregular")
    p.add_argument("--gen-degree", "-K", type=int, default=3, help="generator degree for semi_regular")
    p.add_argument("--rate", type=float, default=0.5)


def _add_encoder(p):
    p.add_argument("--mode", choices=("soft", "soft_hard"), default="soft_hard")
    p.add_argument("--schedule", choices=SCHEDULE_KINDS, default="constant")
    p.add_argument("--xi-start", type=float, default=0.05)
    p.add_argument("--xi-end", type=float, default=None)
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--inner-iters", type=int, default=1)
    p.add_argument("--total-iters", type=int, default=100)
    p.add_argument("--decimation", choices=("spread", "fixed", "budgeted"), default="spread")
    p.add_argument("--bits-per-round", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ldgm-bpgd", description="LDGM lossy compression with BP-guided decimation")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="draw a graph and write it as an edge list")
    _add_ensemble(g)
    g.add_argument("-N", "--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", default="-")

    e = sub.add_parser("encode", help="encode one random source, print a JSON result")
    _add_ensemble(e)
    _add_encoder(e)
    e.add_argument("-N", "--n", type=int, default=1000)
    e.add_argument("--graph", help="graph file from 'generate' (otherwise one is drawn)")
    e.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("sweep", help="run a multi-seed experiment from a config file")
    s.add_argument("config")
    s.add_argument("--seed", type=int, required=True, help="root seed (overrides the file)")
    s.add_argument("--seeds", type=int, help="seeds per cell")
    s.add_argument("--workers", type=int)
    s.add_argument("--output-dir", "-o")
    s.add_argument("--no-plot", action="store_true")

    r = sub.add_parser("grid", help="constant-xi grid search")
    r.add_argument("config")
    r.add_argument("--xi", type=float, nargs="+", required=True, help="grid of xi values")
    r.add_argument("--seed", type=int, help="root seed (overrides the file)")
    r.add_argument("--seeds", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--output", "-o", default="-", help="summary CSV path")

    t = sub.add_parser("stability", help="row-sum bound table as CSV")
    t.add_argument("--beta", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    t.add_argument("--profile", action="append", metavar="NAME=DV,DC",
                   help="degree profile, repeatable (default: a few small regular profiles)")
    t.add_argument("--epsilon", type=float, default=1e-6)
    t.add_argument("-o", "--output", default="-")
    return ap


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w")


def _draw_graph(args, n, seed):
    rng = np.random.default_rng(child_seeds(seed, n, 0, 0))
    if args.ensemble == "semi_regular":
        return build_semi_regular(n, args.rate, args.gen_degree, rng)
    return build_irregular(n, args.rate, seed=rng)


def _cmd_generate(args):
    graph = _draw_graph(args, args.n, args.seed)
    fh = _open_out(args.output)
    try:
        save_graph(graph, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _encoder_from_args(args) -> EncoderConfig:
    xi_end = args.xi_start if args.xi_end is None and args.schedule == "constant" else args.xi_end
    sched = Schedule(args.schedule, args.xi_start, xi_end)
    return EncoderConfig(sched, mode=args.mode, inner_iters=args.inner_iters, total_iters=args.total_iters,
                         max_rounds=args.max_rounds, bits_per_round=args.bits_per_round,
                         decimation=args.decimation, epsilon=args.epsilon)


def _cmd_encode(args):
    try:
        cfg = _encoder_from_args(args)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    graph = load_graph(args.graph) if args.graph else _draw_graph(args, args.n, args.seed)
    src_rng = np.random.default_rng(child_seeds(args.seed, graph.n_generators, 0, 1))
    source = src_rng.integers(0, 2, size=graph.n_generators, dtype=np.uint8)
    res = encode(graph, source, cfg, np.random.default_rng(child_seeds(args.seed, graph.n_generators, 0, 2)))
    print(json.dumps({
        "mode": cfg.mode, "N": graph.n_generators, "M": graph.n_codebits,
        "schedule": cfg.schedule.describe(), "seed": args.seed,
        "distortion": res.distortion, "rounds_used": res.rounds_used,
        "hardened_tail": res.hardened_tail, "sweeps": res.sweeps, "wall_time": res.wall_time,
    }))
    return EXIT_OK


def _load(args) -> ExperimentConfig:
    return load_config(args.config, root_seed=args.seed, seeds=args.seeds, workers=args.workers)


def _cmd_sweep(args):
    cfg = _load(args)
    outdir = args.output_dir or cfg.output_dir or "results"
    records, rows = run_sweep(cfg, progress=lambda j, n: log.info("job %d/%d", j, n))
    paths = emit_outputs(records, rows, outdir, cfg.rate, cfg.root_seed, plot=not args.no_plot)
    for key, path in paths.items():
        print(f"{key}: {path}")
    return EXIT_OK


def _cmd_grid(args):
    cfg = _load(args)
    best, rows = grid_search_constant(cfg, args.xi)
    fh = _open_out(args.output)
    try:
        fh.write(summary_csv(rows))
    finally:
        if fh is not sys.stdout:
            fh.close()
    print(f"best xi: {best:g}", file=sys.stderr)
    return EXIT_OK


def _parse_profile(text):
    try:
        name, degs = text.split("=", 1)
        d_v, d_c = (float(x) for x in degs.split(","))
    except ValueError:
        raise ConfigError(f"bad profile {text!r}, expected NAME=DV,DC") from None
    return name, (d_v, d_c)


def _cmd_stability(args):
    profiles = dict(_parse_profile(p) for p in args.profile) if args.profile else {
        "dv1_dc2": (1, 2), "dv2_dc3": (2, 3), "dv3_dc3": (3, 3), "dv6_dc3": (6, 3),
    }
    try:
        rows = stability_table(args.beta, profiles, args.epsilon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    fh = _open_out(args.output)
    try:
        write_stability_csv(rows, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "encode": _cmd_encode,
    "sweep": _cmd_sweep,
    "grid": _cmd_grid,
    "stability": _cmd_stability,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, GraphError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        if getattr(args, "config", None) and exc.filename == args.config:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
