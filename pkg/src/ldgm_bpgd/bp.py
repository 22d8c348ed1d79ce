"""Flooding belief propagation on a (possibly reduced) LDGM graph.

Messages are log-likelihood ratios ``R = log P(w=1) / P(w=0)`` and biases
are ``B = -tanh(R / 2)``, i.e. the expected spin ``(-1)**w``. One sweep
computes every generator-to-code message from the current code-to-generator
biases, then every code-side quantity from those fresh generator messages.
The reinforcement term uses the node LLR of the previous sweep.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import as_generator
from .graphs import FactorGraph

__all__ = [
    "BpParams",
    "MessageState",
    "INIT_MAGNITUDE",
    "bp_sweep",
    "code_update",
    "generator_update",
    "init_messages",
    "llr_cap",
    "sweep_stats",
    "write_trace_csv",
]

INIT_MAGNITUDE = 0.1
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class BpParams:
    """Sweep parameters: generator gain ``beta``, softness ``mu``, clip margin ``epsilon``."""

    beta: float
    mu: float
    epsilon: float = DEFAULT_EPSILON
    gamma: float | None = None

    def __post_init__(self):
        if self.gamma is not None and abs(self.beta - math.tanh(self.gamma)) >= 1e-12:
            raise ValueError(f"beta={self.beta} is not tanh(gamma={self.gamma})")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta={self.beta} outside (0, 1)")
        if not self.mu > 0.0:
            raise ValueError(f"mu={self.mu} must be positive")
        if not 0.0 < self.epsilon <= 0.1:
            raise ValueError(f"epsilon={self.epsilon} outside (0, 0.1]")

    @classmethod
    def from_gamma(cls, gamma: float, mu: float, epsilon: float = DEFAULT_EPSILON) -> "BpParams":
        return cls(math.tanh(gamma), mu, epsilon, gamma)

    @property
    def reinforcement(self) -> float:
        return 1.0 / self.mu


def llr_cap(epsilon: float) -> float:
    """Largest LLR magnitude whose bias stays inside the clipped domain."""
    return 2.0 * math.atanh(1.0 - epsilon)


@dataclass
class MessageState:
    """Edge-indexed messages plus the decimation bookkeeping.

    ``fixed_mask[i]`` is -1 for a free code bit, else its fixed value.
    ``live`` marks edges whose code bit is still free.
    """

    r_code_to_gen: np.ndarray
    r_gen_to_code: np.ndarray
    r_node: np.ndarray
    bias_node: np.ndarray
    bias_edge: np.ndarray
    residual_source: np.ndarray
    fixed_mask: np.ndarray
    live: np.ndarray
    iteration: int = 0
    reset_pending: bool = True
    epsilon: float = DEFAULT_EPSILON
    live_idx: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.refresh_live()

    def refresh_live(self) -> None:
        self.live_idx = np.flatnonzero(self.live)

    def copy(self) -> "MessageState":
        arrays = {
            k: getattr(self, k).copy()
            for k in ("r_code_to_gen", "r_gen_to_code", "r_node", "bias_node", "bias_edge",
                      "residual_source", "fixed_mask", "live")
        }
        return replace(self, **arrays)

    @property
    def free(self) -> np.ndarray:
        return self.fixed_mask < 0

    @property
    def n_free(self) -> int:
        return int(np.count_nonzero(self.fixed_mask < 0))


def _bias(r: np.ndarray, epsilon: float) -> np.ndarray:
    lim = 1.0 - epsilon
    return np.clip(-np.tanh(0.5 * r), -lim, lim)


def init_messages(graph: FactorGraph, source, seed=None, epsilon: float = DEFAULT_EPSILON) -> MessageState:
    """Random ``+-0.1`` code-to-generator messages, everything else zero.

    The code-to-generator messages are zeroed once, right after the first
    sweep (see :func:`bp_sweep`).
    """
    src = np.asarray(source)
    if src.shape != (graph.n_generators,):
        raise ValueError(f"source has shape {src.shape}, expected ({graph.n_generators},)")
    rng = as_generator(seed)
    e, m = graph.n_edges, graph.n_codebits
    r0 = np.where(rng.random(e) < 0.5, INIT_MAGNITUDE, -INIT_MAGNITUDE)
    return MessageState(
        r_code_to_gen=r0,
        r_gen_to_code=np.zeros(e),
        r_node=np.zeros(m),
        bias_node=np.zeros(m),
        bias_edge=-np.tanh(0.5 * r0),
        residual_source=src.astype(np.uint8).copy(),
        fixed_mask=np.full(m, -1, dtype=np.int8),
        live=np.ones(e, dtype=bool),
        epsilon=epsilon,
    )


def generator_messages(bias_e, gen_e, sign_e, n_gen: int, beta: float) -> np.ndarray:
    """``2 * sign * atanh(beta * prod of the other incoming biases)`` per edge.

    The leave-one-out product is formed in the log domain with separate
    counts of zero factors and negative factors per generator.
    """
    absb = np.abs(bias_e)
    zero = absb == 0.0
    logs = np.log(np.where(zero, 1.0, absb))
    tot_log = np.bincount(gen_e, weights=logs, minlength=n_gen)
    tot_zero = np.bincount(gen_e, weights=zero, minlength=n_gen)
    neg = bias_e < 0.0
    tot_neg = np.bincount(gen_e, weights=neg, minlength=n_gen)
    others_zero = tot_zero[gen_e] - zero
    others_neg = (tot_neg[gen_e] - neg).astype(np.int64) & 1
    mag = np.exp(tot_log[gen_e] - logs)
    u = beta * np.where(others_zero > 0.5, 0.0, np.where(others_neg == 1, -mag, mag))
    return 2.0 * sign_e * np.arctanh(u)


def _source_sign(residual_source: np.ndarray) -> np.ndarray:
    # (-1)**(s + 1): -1 for s = 0, +1 for s = 1
    return 2.0 * residual_source.astype(np.float64) - 1.0


def generator_update(state: MessageState, graph: FactorGraph, params: BpParams) -> np.ndarray:
    """Fresh generator-to-code messages on all edges (zero on dead edges)."""
    idx = state.live_idx
    out = np.zeros(graph.n_edges)
    if idx.size == 0:
        return out
    g = graph.gen[idx]
    sign = _source_sign(state.residual_source)[g]
    out[idx] = generator_messages(state.bias_edge[idx], g, sign, graph.n_generators, params.beta)
    return out


def code_update(state: MessageState, graph: FactorGraph, params: BpParams, r_hat: np.ndarray):
    """Code-side update from generator messages ``r_hat``.

    Returns ``(r_node, r_code_to_gen, bias_node, bias_edge)``. Free code bits
    get ``R_i = sum of incoming``, each outgoing message the sum over the
    other generators plus ``R_i(previous) / mu``. Fixed bits keep their
    values and dead edges carry zero.
    """
    cap = llr_cap(params.epsilon)
    idx = state.live_idx
    free = state.fixed_mask < 0
    c = graph.code[idx]
    sums = np.bincount(c, weights=r_hat[idx], minlength=graph.n_codebits)
    r_node = np.where(free, np.clip(sums, -cap, cap), state.r_node)
    r_out = np.zeros(graph.n_edges)
    r_out[idx] = np.clip(sums[c] - r_hat[idx] + state.r_node[c] / params.mu, -cap, cap)
    bias_node = np.where(free, _bias(r_node, params.epsilon), state.bias_node)
    bias_edge = np.zeros(graph.n_edges)
    bias_edge[idx] = _bias(r_out[idx], params.epsilon)
    return r_node, r_out, bias_node, bias_edge


def bp_sweep(state: MessageState, graph: FactorGraph, params: BpParams) -> MessageState:
    """One flooding sweep, applied to ``state`` in place and returned.

    On the first sweep after :func:`init_messages` the code-to-generator
    messages are reset to zero once the sweep completes.
    """
    r_hat = generator_update(state, graph, params)
    r_node, r_out, bias_node, bias_edge = code_update(state, graph, params, r_hat)
    state.r_gen_to_code = r_hat
    state.r_node, state.r_code_to_gen = r_node, r_out
    state.bias_node, state.bias_edge = bias_node, bias_edge
    state.iteration += 1
    if state.reset_pending:
        state.r_code_to_gen = np.zeros(graph.n_edges)
        state.bias_edge = np.zeros(graph.n_edges)
        state.reset_pending = False
    return state


def sweep_stats(state: MessageState) -> dict:
    """Bias summary over free code bits for trace output."""
    b = np.abs(state.bias_node[state.fixed_mask < 0])
    if b.size == 0:
        return {"iteration": state.iteration, "mean_abs_bias": 0.0, "max_abs_bias": 0.0, "n_saturated": 0}
    return {
        "iteration": state.iteration,
        "mean_abs_bias": float(b.mean()),
        "max_abs_bias": float(b.max()),
        "n_saturated": int(np.count_nonzero(b > 0.99)),
    }


TRACE_FIELDS = ("iteration", "mean_abs_bias", "max_abs_bias", "n_saturated")


def write_trace_csv(rows, fh) -> None:
    """Stream per-sweep records (dicts from :func:`sweep_stats`) as CSV."""
    writer = csv.DictWriter(fh, fieldnames=TRACE_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
