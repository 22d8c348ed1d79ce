"""Lossy compression of Bernoulli(1/2) sources with LDGM codes and BP-guided decimation."""

from .bench import emit_outputs, grid_search_constant, run_sweep, summarize
from .bp import BpParams, MessageState, bp_sweep, init_messages
from .codec import (
    binary_entropy,
    brute_force_optimal,
    distortion,
    rd_distortion,
    reconstruct,
    shannon_rate,
)
from .config import Arm, ConfigError, ExperimentConfig, load_config, parse_config
from .decimation import EncodeResult, EncoderConfig, encode, fix_bit, select_targets
from .graphs import (
    OPTIMIZED_IRREGULAR,
    DegreeDistribution,
    FactorGraph,
    GraphError,
    build_irregular,
    build_semi_regular,
    degree_stats,
    load_graph,
    save_graph,
)
from .presets import SEMI_REGULAR_PRESETS, SOFT_PRESETS
from .schedule import TABLE1_PRESETS, Schedule, params_from_xi, xi_from_mu
from .stability import analyze, empirical_jacobian, row_sum_bound, safe_beta_range

__version__ = "0.1.0"

__all__ = [
    "OPTIMIZED_IRREGULAR", "SEMI_REGULAR_PRESETS", "SOFT_PRESETS", "TABLE1_PRESETS", "Arm", "BpParams",
    "ConfigError", "DegreeDistribution",
    "EncodeResult", "EncoderConfig", "ExperimentConfig", "FactorGraph", "GraphError", "MessageState",
    "Schedule", "analyze", "binary_entropy", "bp_sweep", "brute_force_optimal", "build_irregular",
    "build_semi_regular", "degree_stats", "distortion", "emit_outputs", "empirical_jacobian", "encode",
    "fix_bit", "grid_search_constant", "init_messages", "load_config", "load_graph", "params_from_xi",
    "parse_config", "rd_distortion", "reconstruct", "row_sum_bound", "run_sweep", "safe_beta_range",
    "save_graph", "select_targets", "shannon_rate", "summarize", "xi_from_mu",
]
