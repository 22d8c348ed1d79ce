"""Multi-seed rate-distortion experiments.

Every ``(N, seed)`` job draws one graph and one Bernoulli(1/2) source, then
runs every schedule arm on that same pair with the same encoder seed, so
differences between arms are paired. Job streams come from
``SeedSequence(root_seed, spawn_key=(N, seed_index, purpose))``; results
are merged in job order, so output does not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from ._rng import child_seeds
from .codec import rd_distortion
from .config import Arm, ExperimentConfig
from .decimation import EncodeResult, encode
from .graphs import build_irregular, build_semi_regular
from .schedule import Schedule

__all__ = [
    "RunRecord",
    "emit_outputs",
    "grid_search_constant",
    "grid_search_endpoints",
    "make_instance",
    "plot_distortion",
    "run_sweep",
    "summarize",
]

log = logging.getLogger(__name__)

_GRAPH, _SOURCE, _ENCODER = 0, 1, 2


@dataclass(frozen=True)
class RunRecord:
    n: int
    m: int
    ensemble: str
    arm: str
    schedule: str
    xi_start: float
    xi_end: float
    mode: str
    decimation: str
    inner_iters: int
    max_rounds: int
    total_iters: int
    iterations: int
    seed_index: int
    distortion: float
    rounds_used: int
    hardened_tail: int
    sweeps: int
    nonconverged: bool
    wall_time: float

    # wall time varies between runs, so it stays out of the CSV
    CSV_FIELDS = ("n", "m", "ensemble", "arm", "schedule", "xi_start", "xi_end", "mode", "decimation",
                  "inner_iters", "max_rounds", "total_iters", "iterations", "seed_index", "distortion",
                  "rounds_used", "hardened_tail", "sweeps", "nonconverged")

    def json_record(self, root_seed: int) -> dict:
        return {
            "mode": self.mode, "N": self.n, "M": self.m,
            "K": self.ensemble[2:] if self.ensemble.startswith("K=") else "irregular",
            "schedule": self.schedule, "seed": [root_seed, self.seed_index],
            "distortion": self.distortion, "rounds_used": self.rounds_used,
            "hardened_tail": self.hardened_tail, "wall_time": self.wall_time,
        }


def make_instance(cfg: ExperimentConfig, n: int, seed_index: int):
    """Graph and source for one job."""
    g_key = (n, 0, _GRAPH) if cfg.shared_graph else (n, seed_index, _GRAPH)
    g_rng = np.random.default_rng(child_seeds(cfg.root_seed, *g_key))
    if cfg.ensemble == "semi_regular":
        graph = build_semi_regular(n, cfg.rate, cfg.gen_degree, g_rng)
    else:
        graph = build_irregular(n, cfg.rate, cfg.distribution, g_rng)
    s_rng = np.random.default_rng(child_seeds(cfg.root_seed, n, seed_index, _SOURCE))
    source = s_rng.integers(0, 2, size=n, dtype=np.uint8)
    return graph, source


def _run_job(args) -> list[RunRecord]:
    cfg, n, seed_index, encoder_fn = args
    graph, source = make_instance(cfg, n, seed_index)
    out = []
    for arm in cfg.arms:
        if not arm.applies_to(n):
            continue
        enc_cfg = replace(cfg.encoder, schedule=arm.schedule)
        enc_seed = np.random.default_rng(child_seeds(cfg.root_seed, n, seed_index, _ENCODER))
        res: EncodeResult = encoder_fn(graph, source, enc_cfg, enc_seed)
        e = cfg.encoder
        out.append(RunRecord(
            n=n, m=graph.n_codebits, ensemble=cfg.ensemble_label, arm=arm.label,
            schedule=arm.schedule.kind, xi_start=arm.schedule.xi_start, xi_end=arm.schedule.xi_end,
            mode=e.mode, decimation=e.decimation, inner_iters=e.inner_iters,
            max_rounds=e.max_rounds, total_iters=e.total_iters, iterations=cfg.iteration_budget,
            seed_index=seed_index,
            distortion=float(res.distortion), rounds_used=res.rounds_used,
            hardened_tail=res.hardened_tail, sweeps=res.sweeps,
            nonconverged=bool(res.hardened_tail > 0) and e.mode == "soft_hard",
            wall_time=res.wall_time,
        ))
    return out


def run_sweep(cfg: ExperimentConfig, workers: int | None = None, encoder_fn=encode,
              progress=None) -> tuple[list[RunRecord], list[dict]]:
    """Run every ``(N, seed, arm)`` cell; returns ``(records, summary rows)``."""
    jobs = [(cfg, n, k, encoder_fn) for n in cfg.n_values for k in range(cfg.seeds)]
    workers = cfg.workers if workers is None else workers
    records: list[RunRecord] = []
    if workers <= 1:
        results = map(_run_job, jobs)
        for j, batch in enumerate(results):
            records.extend(batch)
            if progress:
                progress(j + 1, len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map yields in submission order regardless of completion order
            for j, batch in enumerate(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers)))):
                records.extend(batch)
                if progress:
                    progress(j + 1, len(jobs))
    return records, summarize(records, cfg.arms)


def summarize(records: list[RunRecord], arms=None) -> list[dict]:
    """Per ``(N, arm)`` statistics plus paired differences against the first arm."""
    order = [a.label for a in arms] if arms else list(dict.fromkeys(r.arm for r in records))
    by_cell: dict = {}
    for r in records:
        by_cell.setdefault((r.n, r.arm), []).append(r)
    rows = []
    for n in sorted({r.n for r in records}):
        labels = [lab for lab in order if (n, lab) in by_cell]
        base = {r.seed_index: r.distortion for r in by_cell[(n, labels[0])]}
        for lab in labels:
            cell = by_cell[(n, lab)]
            d = np.array([r.distortion for r in cell])
            paired = np.array([r.distortion - base[r.seed_index] for r in cell if r.seed_index in base])
            first = cell[0]
            rows.append({
                "n": n, "ensemble": first.ensemble, "arm": lab, "schedule": first.schedule,
                "xi_start": first.xi_start, "xi_end": first.xi_end,
                "iterations": first.iterations, "runs": d.size,
                "mean": float(d.mean()),
                "std": float(d.std(ddof=1)) if d.size > 1 else 0.0,
                "min": float(d.min()), "max": float(d.max()),
                "nonconverged_rate": float(np.mean([r.nonconverged for r in cell])),
                "baseline": labels[0],
                "paired_delta": float(paired.mean()),
                "paired_delta_se": float(paired.std(ddof=1) / math.sqrt(paired.size)) if paired.size > 1 else 0.0,
            })
    return rows


def grid_search_constant(cfg: ExperimentConfig, xi_grid, workers: int | None = None, encoder_fn=encode):
    """Constant-``xi`` baseline search.

    Returns ``(best_xi, summary rows)``; the best value minimises the mean
    distortion over all lengths, ties going to the smaller ``xi``.
    """
    grid = sorted(float(x) for x in xi_grid)
    if not grid:
        raise ValueError("xi grid is empty")
    arms = [Arm(f"constant({x:g})", Schedule("constant", x)) for x in grid]
    records, rows = run_sweep(cfg.with_arms(arms), workers, encoder_fn)
    means = []
    for arm, x in zip(arms, grid):
        d = [r.distortion for r in records if r.arm == arm.label]
        means.append(float(np.mean(d)))
    best = grid[int(np.argmin(means))]  # argmin keeps the first (smallest) on ties
    return best, rows


def grid_search_endpoints(cfg: ExperimentConfig, xi_star: float, start_factors, end_factors,
                          kind: str = "exponential", workers: int | None = None, encoder_fn=encode):
    """Scheduled endpoints from a neighbourhood of a constant baseline ``xi_star``.

    Tries every ``(a * xi_star, b * xi_star)`` with ``a < b`` and returns
    ``((xi_start, xi_end), summary rows)`` for the pair with the lowest mean
    distortion; ties go to the earlier pair in ``(a, b)`` order. The
    constant arm is included first, so every row carries its paired delta.
    """
    pairs = [(a, b) for a in sorted(start_factors) for b in sorted(end_factors) if a < b]
    if not pairs:
        raise ValueError("no start/end factor pair with start < end")
    arms = [Arm(f"constant({xi_star:g})", Schedule("constant", xi_star))]
    arms += [Arm(f"{kind}({a:g}x,{b:g}x)", Schedule(kind, a * xi_star, b * xi_star)) for a, b in pairs]
    records, rows = run_sweep(cfg.with_arms(arms), workers, encoder_fn)
    means = [float(np.mean([r.distortion for r in records if r.arm == arm.label])) for arm in arms[1:]]
    a, b = pairs[int(np.argmin(means))]
    return (a * xi_star, b * xi_star), rows


# --------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RunRecord.CSV_FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, f)) for f in RunRecord.CSV_FIELDS])
    return buf.getvalue()


SUMMARY_FIELDS = ("n", "ensemble", "arm", "schedule", "xi_start", "xi_end", "iterations", "runs", "mean",
                  "std", "min", "max", "nonconverged_rate", "baseline", "paired_delta", "paired_delta_se")


def summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for row in rows:
        w.writerow([_fmt(row[f]) for f in SUMMARY_FIELDS])
    return buf.getvalue()


def markdown_table(rows: list[dict]) -> str:
    """Length | Iteration | Method | Distortion | Start point | End point."""
    lines = ["| Length | Iteration | Method | Distortion | Start point | End point |",
             "|---|---|---|---|---|---|"]
    for r in rows:
        lines.append(f"| {r['n']} | {r['iterations']} | {r['arm']} | {r['mean']:.4f} "
                     f"| {r['xi_start']:.3f} | {r['xi_end']:.3f} |")
    return "\n".join(lines) + "\n"


def plot_distortion(rows: list[dict], rate: float):
    """Distortion against block length, one curve per arm, with the Shannon floor."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for arm in dict.fromkeys(r["arm"] for r in rows):
        pts = sorted((r["n"], r["mean"]) for r in rows if r["arm"] == arm)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=arm, gid=f"curve:{arm}")
    floor = rd_distortion(rate)
    ax.axhline(floor, color="k", linestyle="--", label=f"Shannon limit D*={floor:.4f}", gid="shannon-floor")
    ax.set_xscale("log")
    ax.set_xlabel("block length N")
    ax.set_ylabel("average distortion")
    ax.legend()
    fig.tight_layout()
    return fig


def emit_outputs(records: list[RunRecord], rows: list[dict], outdir, rate: float, root_seed: int = 0,
                 plot: bool = True) -> dict:
    """Write records/summary CSV, JSON lines, a Markdown table and an SVG plot."""
    if not records:
        raise ValueError("no records to write")
    floor = rd_distortion(rate)
    for row in rows:
        if row["mean"] <= floor:
            log.warning("mean distortion %.4f for N=%s %s is below the Shannon limit %.4f",
                        row["mean"], row["n"], row["arm"], floor)
    os.makedirs(outdir, exist_ok=True)
    paths = {
        "records": os.path.join(outdir, "records.csv"),
        "summary": os.path.join(outdir, "summary.csv"),
        "jsonl": os.path.join(outdir, "records.jsonl"),
        "table": os.path.join(outdir, "table.md"),
    }
    with open(paths["records"], "w") as fh:
        fh.write(records_csv(records))
    with open(paths["summary"], "w") as fh:
        fh.write(summary_csv(rows))
    with open(paths["jsonl"], "w") as fh:
        for r in records:
            fh.write(json.dumps(r.json_record(root_seed)) + "\n")
    with open(paths["table"], "w") as fh:
        fh.write(markdown_table(rows))
    if plot:
        import matplotlib
        matplotlib.rcParams["svg.hashsalt"] = "ldgm-bpgd"
        fig = plot_distortion(rows, rate)
        paths["plot"] = os.path.join(outdir, "distortion.svg")
        fig.savefig(paths["plot"], format="svg", metadata={"Date": None})
        import matplotlib.pyplot as plt
        plt.close(fig)
    return paths


def record_dicts(records: list[RunRecord]) -> list[dict]:
    return [asdict(r) for r in records]
