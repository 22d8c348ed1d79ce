from __future__ import annotations

import json

import numpy as np
import pytest

from ldgm_bpgd.bench import (
    RunRecord,
    emit_outputs,
    grid_search_constant,
    grid_search_endpoints,
    make_instance,
    markdown_table,
    plot_distortion,
    records_csv,
    run_sweep,
    summarize,
)
from ldgm_bpgd.codec import rd_distortion, reconstruct
from ldgm_bpgd.config import Arm, ConfigError, ExperimentConfig, parse_config
from ldgm_bpgd.decimation import EncodeResult, EncoderConfig
from ldgm_bpgd.schedule import Schedule

BASE = """\
schema_version: 1
ensemble: {kind: semi_regular, gen_degree: 3}
n_values: [40, 80]
encoder: {mode: soft_hard, max_rounds: 20}
schedules:
  - {kind: constant, xi_start: 0.1, label: const}
  - {kind: exponential, xi_start: 0.05, xi_end: 0.2, label: exp}
seeds: 3
root_seed: 5
"""


def stub_encoder(graph, source, cfg, seed):
    """Distortion (xi - 0.07)^2 + 0.2, independent of the instance."""
    xi = cfg.schedule.xi_start
    w = np.zeros(graph.n_codebits, dtype=np.uint8)
    return EncodeResult(w, reconstruct(graph, w), (xi - 0.07) ** 2 + 0.2, 1, 0, 1, graph.n_edges)


def test_parse_config_basic():
    cfg = parse_config(BASE)
    assert cfg.n_values == (40, 80)
    assert [a.label for a in cfg.arms] == ["const", "exp"]
    assert cfg.encoder.max_rounds == 20
    assert cfg.ensemble_label == "K=3"
    assert cfg.iteration_budget == 20


def test_table1_schedules_expand_per_length():
    cfg = parse_config("schema_version: 1\nn_values: [100, 1000]\nschedules: table1\n")
    assert len(cfg.arms) == 6
    assert cfg.arms[0].applies_to(100) and not cfg.arms[0].applies_to(1000)


@pytest.mark.parametrize("text, line, fragment", [
    ("schema_version: 1\nn_values: [10]\nschedule: {kind: constant, xi_start: 0.1}\nbogus: 3\n", 4, "unknown key"),
    ("schema_version: 2\nn_values: [10]\n", 1, "schema_version"),
    ("schema_version: 1\nn_values: [10]\nschedules:\n  - {kind: linear, xi_start: 0.3, xi_end: 0.1}\n", 4, "invalid schedule"),
    ("schema_version: 1\nn_values: [10]\nschedules: []\n", 3, "non-empty"),
    ("schema_version: 1\nn_values: [0, 10]\nschedules: table1\n", 2, "n_values"),
    ("schema_version: 1\nn_values: [10]\nseeds: 0\nschedule: {kind: constant, xi_start: 0.1}\n", 3, "seeds"),
    ("schema_version: 1\nn_values: [10]\nencoder:\n  mode: soft\n  colour: red\n", 5, "encoder.colour"),
    ("schema_version: 1\nn_values: [10]\nensemble: {kind: irregular, preset: other}\n", 3, "preset"),
    ("schema_version: 1\nn_values: [10\n", None, "YAML"),
])
def test_config_errors_name_the_line(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text, source="exp.yaml")
    assert fragment in str(info.value)
    if line is not None:
        assert info.value.line == line
        assert f"exp.yaml:{line}:" in str(info.value)


def test_empty_schedule_list_fails_before_running():
    with pytest.raises(ConfigError):
        ExperimentConfig(arms=(), n_values=(10,), root_seed=0)


def test_overrides():
    cfg = parse_config(BASE, root_seed=9, seeds=None)
    assert cfg.root_seed == 9 and cfg.seeds == 3


def test_paired_instances_across_arms():
    seen = []

    def spy(graph, source, cfg, seed):
        seen.append((cfg.schedule.kind, graph.gen.tobytes(), graph.code.tobytes(), source.tobytes(),
                     seed.bit_generator.state["state"]["state"]))
        return stub_encoder(graph, source, cfg, seed)

    cfg = parse_config(BASE)
    run_sweep(cfg, workers=1, encoder_fn=spy)
    assert len(seen) == 2 * 2 * 3
    for j in range(0, len(seen), 2):
        const, exp = seen[j], seen[j + 1]
        assert const[0] == "constant" and exp[0] == "exponential"
        assert const[1:] == exp[1:]
    # different seeds give different instances
    assert seen[0][3] != seen[2][3] or seen[0][1] != seen[2][1]


def test_shared_graph_mode():
    cfg = parse_config(BASE + "shared_graph: true\n")
    g0, s0 = make_instance(cfg, 40, 0)
    g1, s1 = make_instance(cfg, 40, 1)
    assert g0 == g1 and not np.array_equal(s0, s1)


def test_sweep_deterministic_across_workers():
    cfg = parse_config(BASE)
    r1, _ = run_sweep(cfg, workers=1)
    r2, _ = run_sweep(cfg, workers=1)
    r8, _ = run_sweep(cfg, workers=8)
    assert records_csv(r1) == records_csv(r2) == records_csv(r8)


def test_single_seed_rerun_identical(tmp_path):
    cfg = parse_config(BASE, seeds=1)
    for d in ("a", "b"):
        recs, rows = run_sweep(cfg)
        emit_outputs(recs, rows, tmp_path / d, cfg.rate, cfg.root_seed, plot=False)
    for name in ("records.csv", "summary.csv", "table.md"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_summary_statistics():
    cfg = parse_config(BASE)
    records, rows = run_sweep(cfg, workers=1)
    assert len(records) == 12 and len(rows) == 4
    for row in rows:
        d = [r.distortion for r in records if r.n == row["n"] and r.arm == row["arm"]]
        assert row["mean"] == pytest.approx(np.mean(d))
        assert row["std"] == pytest.approx(np.std(d, ddof=1))
        assert row["min"] == min(d) and row["max"] == max(d)
        assert row["baseline"] == "const"
        if row["arm"] == "const":
            assert row["paired_delta"] == 0.0
    for r in records:
        assert 0.0 <= r.distortion <= 1.0


def test_grid_search_stub_analytic_minimum():
    cfg = parse_config(BASE)
    grid = [0.03, 0.05, 0.07, 0.09, 0.11]
    best, rows = grid_search_constant(cfg, grid, encoder_fn=stub_encoder)
    assert best == 0.07
    assert len(rows) == len(grid) * 2


def test_grid_search_ties_go_to_smaller_xi():
    cfg = parse_config(BASE)
    best, _ = grid_search_constant(cfg, [0.09, 0.05], encoder_fn=stub_encoder)
    assert best == 0.05


def test_grid_search_single_element():
    cfg = parse_config(BASE, seeds=1)
    best, _ = grid_search_constant(cfg, [0.12])
    assert best == 0.12
    with pytest.raises(ValueError):
        grid_search_constant(cfg, [])


def test_endpoint_search_with_stub():
    # the stub only sees xi_start, so the smallest start factor closest to 0.07 wins
    cfg = parse_config(BASE, seeds=1)
    (lo, hi), rows = grid_search_endpoints(cfg, 0.1, (0.5, 0.7, 0.9), (1.5, 2.0), encoder_fn=stub_encoder)
    assert lo == pytest.approx(0.07) and hi == pytest.approx(0.15)
    assert rows[0]["arm"].startswith("constant")


def _rows_for(arms, ns):
    recs = []
    for n in ns:
        for k, arm in enumerate(arms):
            for seed in range(2):
                recs.append(RunRecord(n, n // 2, "irregular", arm, "constant", 0.1, 0.1, "soft", "spread",
                                      1, 100, 100, 100, seed, 0.15 + 0.01 * k + 1.0 / n, 100, 0, 100,
                                      False, 0.0))
    return recs


def test_plot_cardinality_and_floor():
    arms = ["constant", "linear", "exponential"]
    ns = [200, 500, 1000, 2000]
    rows = summarize(_rows_for(arms, ns))
    fig = plot_distortion(rows, 0.5)
    lines = fig.axes[0].get_lines()
    curves = [ln for ln in lines if ln.get_gid() and ln.get_gid().startswith("curve:")]
    floors = [ln for ln in lines if ln.get_gid() == "shannon-floor"]
    assert len(curves) == 3 and len(floors) == 1 and len(lines) == 4
    assert all(len(c.get_xdata()) == 4 for c in curves)
    assert floors[0].get_ydata()[0] == pytest.approx(0.1100, abs=1e-4)
    assert floors[0].get_ydata()[0] == rd_distortion(0.5)


def test_emit_outputs_files(tmp_path):
    recs = _rows_for(["constant", "exponential"], [200, 500])
    rows = summarize(recs)
    paths = emit_outputs(recs, rows, tmp_path, 0.5, root_seed=4)
    svg = (tmp_path / "distortion.svg").read_text()
    assert svg.count('id="curve:') == 2 and 'id="shannon-floor"' in svg
    lines = (tmp_path / "records.csv").read_text().splitlines()
    assert len(lines) == 1 + len(recs)
    assert "wall_time" not in lines[0]
    js = [json.loads(x) for x in (tmp_path / "records.jsonl").read_text().splitlines()]
    assert js[0]["seed"] == [4, 0] and "wall_time" in js[0]
    table = (tmp_path / "table.md").read_text().splitlines()
    assert table[0] == "| Length | Iteration | Method | Distortion | Start point | End point |"
    assert set(paths) == {"records", "summary", "jsonl", "table", "plot"}
    with pytest.raises(ValueError):
        emit_outputs([], [], tmp_path, 0.5)


def test_markdown_table_layout():
    rows = summarize(_rows_for(["constant"], [100]))
    md = markdown_table(rows).splitlines()
    assert md[2].startswith("| 100 | 100 | constant | ")
    assert md[2].endswith("| 0.100 | 0.100 |")


def test_arm_restricted_to_lengths():
    cfg = ExperimentConfig(
        arms=(Arm("a", Schedule("constant", 0.1), (40,)), Arm("b", Schedule("constant", 0.2))),
        n_values=(40, 80), root_seed=0, ensemble="semi_regular", seeds=1,
        encoder=EncoderConfig(Schedule("constant", 0.1), max_rounds=5),
    )
    records, _ = run_sweep(cfg, encoder_fn=stub_encoder)
    assert [(r.n, r.arm) for r in records] == [(40, "a"), (40, "b"), (80, "b")]
