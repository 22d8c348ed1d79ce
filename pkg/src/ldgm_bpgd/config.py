"""Experiment configuration files.

A config is a YAML mapping with an explicit ``schema_version``. Unknown keys
are rejected and every error names the offending line::

    schema_version: 1
    ensemble: {kind: irregular, preset: optimized}
    n_values: [100, 1000]
    rate: 0.5
    encoder: {mode: soft_hard, max_rounds: 100, inner_iters: 1}
    schedules: table1          # or a list of {kind, xi_start, xi_end, label, n}
    seeds: 50
    root_seed: 1
    output: {dir: results}
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from os import PathLike

import yaml

from .decimation import EncoderConfig
from .graphs import OPTIMIZED_IRREGULAR, DegreeDistribution
from .schedule import SCHEDULE_KINDS, TABLE1_PRESETS, Schedule

__all__ = ["Arm", "ConfigError", "ExperimentConfig", "load_config", "parse_config"]

SCHEMA_VERSION = 1

PRESETS = {"optimized": OPTIMIZED_IRREGULAR}

_TOP_KEYS = {"schema_version", "ensemble", "n_values", "rate", "encoder", "schedule", "schedules",
             "seeds", "root_seed", "shared_graph", "workers", "output"}
_ENSEMBLE_KEYS = {"kind", "gen_degree", "preset"}
_ENCODER_KEYS = {"mode", "inner_iters", "total_iters", "max_rounds", "bits_per_round", "decimation",
                 "sweep_budget", "epsilon", "reinit_each_round"}
_SCHEDULE_KEYS = {"kind", "xi_start", "xi_end", "label", "n"}
_OUTPUT_KEYS = {"dir"}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.message = message
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Arm:
    """One schedule arm of an experiment, optionally limited to some lengths."""

    label: str
    schedule: Schedule
    n_values: tuple[int, ...] | None = None

    def applies_to(self, n: int) -> bool:
        return self.n_values is None or n in self.n_values


@dataclass(frozen=True)
class ExperimentConfig:
    arms: tuple[Arm, ...]
    n_values: tuple[int, ...]
    root_seed: int
    ensemble: str = "irregular"
    gen_degree: int = 3
    preset: str = "optimized"
    rate: float = 0.5
    encoder: EncoderConfig = field(default_factory=lambda: EncoderConfig(Schedule("constant", 0.05)))
    seeds: int = 50
    shared_graph: bool = False
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        if not self.arms:
            raise ConfigError("no schedules given")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("n_values must be a non-empty list of positive integers")
        if self.ensemble not in ("irregular", "semi_regular"):
            raise ConfigError(f"unknown ensemble {self.ensemble!r}")
        if self.ensemble == "irregular" and self.preset not in PRESETS:
            raise ConfigError(f"unknown degree-distribution preset {self.preset!r}")
        # a label may repeat across arms restricted to different lengths
        for n in self.n_values:
            labels = [a.label for a in self.arms if a.applies_to(n)]
            if len(set(labels)) != len(labels):
                raise ConfigError(f"schedule labels must be unique for each length (N={n})")
            if not labels:
                raise ConfigError(f"no schedule applies to N={n}")

    @property
    def distribution(self) -> DegreeDistribution:
        return PRESETS[self.preset]

    @property
    def ensemble_label(self) -> str:
        return f"K={self.gen_degree}" if self.ensemble == "semi_regular" else "irregular"

    @property
    def iteration_budget(self) -> int:
        e = self.encoder
        if e.mode == "soft":
            return e.total_iters
        if e.decimation == "budgeted":
            return e.sweep_budget
        return e.max_rounds * e.inner_iters

    def with_arms(self, arms) -> "ExperimentConfig":
        return replace(self, arms=tuple(arms))


# --------------------------------------------------------------------------
# loading


def _to_python(node, lines: dict, path: tuple):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for knode, vnode in node.value:
            key = knode.value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", knode.start_mark.line + 1)
            out[key] = _to_python(vnode, lines, path + (key,))
            lines[path + (key,)] = knode.start_mark.line + 1
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, lines, path + (j,)) for j, v in enumerate(node.value)]
    return yaml.safe_load(yaml.serialize(node))


def parse_config(text: str, source: str = "<config>", **overrides) -> ExperimentConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    if root is None or not isinstance(root, yaml.MappingNode):
        raise ConfigError("config must be a mapping", 1, source)
    lines: dict = {}
    try:
        data = _to_python(root, lines, ())
    except ConfigError as exc:
        raise ConfigError(exc.message, exc.line, source) from None

    def fail(msg, *path):
        line = None
        p = tuple(path)
        while p and line is None:
            line = lines.get(p)
            p = p[:-1]
        raise ConfigError(msg, line if line is not None else lines.get(()), source)

    def check_keys(mapping, allowed, *path):
        if not isinstance(mapping, dict):
            fail("expected a mapping", *path)
        for k in mapping:
            if k not in allowed:
                fail(f"unknown key {'.'.join(map(str, path + (k,)))!r}", *path, k)

    def get_int(mapping, key, default, *path, minimum=1):
        v = mapping.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            fail(f"{key} must be an integer >= {minimum}", *path, key)
        return v

    check_keys(data, _TOP_KEYS)
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        fail(f"schema_version must be {SCHEMA_VERSION}, got {version!r}", "schema_version")

    ens = data.get("ensemble", {"kind": "irregular"})
    check_keys(ens, _ENSEMBLE_KEYS, "ensemble")
    kind = ens.get("kind", "irregular")
    if kind not in ("irregular", "semi_regular"):
        fail(f"ensemble.kind must be irregular or semi_regular, got {kind!r}", "ensemble", "kind")
    gen_degree = get_int(ens, "gen_degree", 3, "ensemble")
    preset = ens.get("preset", "optimized")
    if preset not in PRESETS:
        fail(f"unknown preset {preset!r}", "ensemble", "preset")

    n_values = data.get("n_values")
    if (not isinstance(n_values, list) or not n_values
            or any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in n_values)):
        fail("n_values must be a non-empty list of positive integers", "n_values")

    rate = data.get("rate", 0.5)
    if isinstance(rate, bool) or not isinstance(rate, (int, float)) or not 0 < rate <= 1:
        fail("rate must be a number in (0, 1]", "rate")

    enc = data.get("encoder", {})
    check_keys(enc, _ENCODER_KEYS, "encoder")
    enc_kwargs = {}
    for key in ("inner_iters", "total_iters", "max_rounds", "bits_per_round", "sweep_budget"):
        if key in enc:
            enc_kwargs[key] = get_int(enc, key, None, "encoder")
    for key in ("mode", "decimation"):
        if key in enc:
            enc_kwargs[key] = enc[key]
    if "epsilon" in enc:
        enc_kwargs["epsilon"] = enc["epsilon"]
    if "reinit_each_round" in enc:
        if not isinstance(enc["reinit_each_round"], bool):
            fail("reinit_each_round must be true or false", "encoder", "reinit_each_round")
        enc_kwargs["reinit_each_round"] = enc["reinit_each_round"]

    if "schedule" in data and "schedules" in data:
        fail("give either 'schedule' or 'schedules', not both", "schedules")
    if "schedule" in data:
        raw = [data["schedule"]]
        base = ("schedule",)
        single = True
    else:
        raw = data.get("schedules")
        base = ("schedules",)
        single = False
    arms = []
    if raw == "table1" or raw == ["table1"]:
        for n in n_values:
            if n not in TABLE1_PRESETS:
                fail(f"no table1 preset for N={n}", *base)
            for label, sched in TABLE1_PRESETS[n].items():
                arms.append((label, sched, (n,)))
    else:
        if not isinstance(raw, list) or not raw:
            fail("schedules must be a non-empty list (or 'table1')", *base)
        for j, item in enumerate(raw):
            path = base if single else base + (j,)
            check_keys(item, _SCHEDULE_KEYS, *path)
            skind = item.get("kind")
            if skind not in SCHEDULE_KINDS:
                fail(f"schedule kind must be one of {', '.join(SCHEDULE_KINDS)}", *path, "kind")
            try:
                sched = Schedule(skind, item.get("xi_start"), item.get("xi_end"))
            except (TypeError, ValueError) as exc:
                fail(f"invalid schedule: {exc}", *path)
            ns = item.get("n")
            if ns is not None:
                ns = tuple(ns) if isinstance(ns, list) else (ns,)
            arms.append((str(item.get("label", skind)), sched, ns))

    out = data.get("output", {})
    check_keys(out, _OUTPUT_KEYS, "output")
    shared = data.get("shared_graph", False)
    if not isinstance(shared, bool):
        fail("shared_graph must be true or false", "shared_graph")
    root_seed = data.get("root_seed", 0)
    if isinstance(root_seed, bool) or not isinstance(root_seed, int) or root_seed < 0:
        fail("root_seed must be a non-negative integer", "root_seed")

    try:
        encoder = EncoderConfig(arms[0][1], **enc_kwargs)
        cfg = ExperimentConfig(
            arms=tuple(Arm(label, s, ns) for label, s, ns in arms),
            n_values=tuple(n_values),
            root_seed=root_seed,
            ensemble=kind,
            gen_degree=gen_degree,
            preset=preset,
            rate=float(rate),
            encoder=encoder,
            seeds=get_int(data, "seeds", 50),
            shared_graph=shared,
            workers=get_int(data, "workers", 1),
            output_dir=out.get("dir"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        fail(str(exc), "encoder")
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg


def load_config(path: str | PathLike, **overrides) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), str(path), **overrides)
