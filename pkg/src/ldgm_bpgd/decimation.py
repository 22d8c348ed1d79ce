"""Soft and soft-hard BPGD encoders.

Soft mode runs a fixed number of sweeps, moving the softness parameters
along the schedule at every sweep, then reads every bit off its bias.

Soft-hard mode alternates ``inner_iters`` sweeps with fixing the most
biased free code bits. The schedule advances once per decimation round.
Fixing a bit to 1 flips the residual source bit of each adjacent generator
and the bit's edges leave the graph. Whatever is still free when the round
cap is reached is read off its bias ("hardened").

Bit convention: ``w_i = 0`` iff ``B_i > 0``; a zero bias gets a fair coin.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ._rng import as_generator
from .bp import BpParams, MessageState, bp_sweep, init_messages, sweep_stats, INIT_MAGNITUDE
from .codec import distortion, reconstruct
from .graphs import FactorGraph
from .schedule import Schedule, params_from_xi

__all__ = [
    "EncodeResult",
    "EncoderConfig",
    "encode",
    "encode_soft",
    "encode_soft_hard",
    "fix_bit",
    "fix_bits",
    "harden",
    "select_targets",
]

#: |B| at or above which the budgeted policy starts fixing bits
SATURATION = 0.99


@dataclass(frozen=True)
class EncoderConfig:
    """Encoder settings.

    ``decimation`` picks how many bits a soft-hard round fixes:

    ``"spread"``
        the free bits are spread evenly over the rounds, so round ``r`` ends
        with ``M - floor((r+1) M / rounds)`` free bits and every bit is fixed
        by the last round. When ``M < rounds`` some rounds fix nothing and
        the schedule still runs to its end point.
    ``"fixed"``
        exactly ``bits_per_round`` per round; survivors at ``max_rounds`` are
        hardened.
    ``"budgeted"``
        one sweep per round and at most ``sweep_budget`` sweeps; one bit is
        fixed after each sweep once some free bit has ``|B| >= 0.99``;
        survivors are hardened.
    """

    schedule: Schedule
    mode: Literal["soft", "soft_hard"] = "soft_hard"
    inner_iters: int = 1
    total_iters: int = 100
    max_rounds: int = 100
    bits_per_round: int = 1
    decimation: Literal["spread", "fixed", "budgeted"] = "spread"
    sweep_budget: int = 100
    epsilon: float = 1e-6
    reinit_each_round: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if self.mode not in ("soft", "soft_hard"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.decimation not in ("spread", "fixed", "budgeted"):
            raise ValueError(f"unknown decimation policy {self.decimation!r}")
        for name in ("inner_iters", "total_iters", "max_rounds", "bits_per_round", "sweep_budget"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def n_schedule_rounds(self) -> int:
        if self.mode == "soft":
            return self.total_iters
        if self.decimation == "budgeted":
            return self.sweep_budget
        return self.max_rounds


@dataclass
class EncodeResult:
    codeword: np.ndarray
    reconstruction: np.ndarray
    distortion: float
    rounds_used: int
    hardened_tail: int
    sweeps: int
    edge_updates: int
    trace: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def nonconverged(self) -> bool:
        """True when some bits had to be hardened instead of decimated."""
        return self.hardened_tail > 0


# --------------------------------------------------------------------------
# decimation primitives


def bits_from_bias(bias: np.ndarray, rng) -> np.ndarray:
    coin = rng.integers(0, 2, size=bias.shape)
    return np.where(bias > 0, 0, np.where(bias < 0, 1, coin)).astype(np.uint8)


def select_targets(state: MessageState, k: int, seed=None) -> np.ndarray:
    """The ``k`` free code bits with the largest ``|B_i|``.

    Ties (exact equality) are broken uniformly at random.
    """
    free = np.flatnonzero(state.fixed_mask < 0)
    if k > free.size:
        raise ValueError(f"asked for {k} targets but only {free.size} bits are free")
    rng = as_generator(seed)
    mag = np.abs(state.bias_node[free])
    order = np.lexsort((rng.random(free.size), -mag))
    return free[order[:k]]


def fix_bits(graph: FactorGraph, state: MessageState, bits, values) -> None:
    """Fix code bits in place and remove their edges from the live graph."""
    bits = np.atleast_1d(np.asarray(bits, dtype=np.int64))
    values = np.broadcast_to(np.asarray(values, dtype=np.uint8), bits.shape)
    if np.unique(bits).size != bits.size:
        raise ValueError("a bit appears twice in one fix request")
    already = state.fixed_mask[bits] >= 0
    if already.any():
        raise ValueError(f"code bit {int(bits[already][0])} is already fixed")
    if not np.isin(values, (0, 1)).all():
        raise ValueError("fixed values must be 0 or 1")
    state.fixed_mask[bits] = values
    edges = np.concatenate([graph.code_edges(int(i)) for i in bits]) if bits.size else np.empty(0, np.int64)
    ones = np.repeat(values, graph.code_degrees()[bits]).astype(bool)
    # parity absorption: s_a ^= w_i for every a in C(i)
    flips = np.bincount(graph.gen[edges[ones]], minlength=graph.n_generators) & 1
    state.residual_source ^= flips.astype(np.uint8)
    state.live[edges] = False
    state.r_code_to_gen[edges] = 0.0
    state.r_gen_to_code[edges] = 0.0
    state.bias_edge[edges] = 0.0
    lim = 1.0 - state.epsilon
    state.bias_node[bits] = np.where(values == 0, lim, -lim)
    state.refresh_live()


def fix_bit(graph: FactorGraph, state: MessageState, i: int, value: int) -> None:
    fix_bits(graph, state, [i], [value])


def harden(graph: FactorGraph, state: MessageState, rng) -> int:
    """Fix every free bit from the sign of its bias; returns how many."""
    free = np.flatnonzero(state.fixed_mask < 0)
    if free.size:
        fix_bits(graph, state, free, bits_from_bias(state.bias_node[free], rng))
    return int(free.size)


def _reinit(state: MessageState, rng) -> None:
    idx = state.live_idx
    r0 = np.where(rng.random(idx.size) < 0.5, INIT_MAGNITUDE, -INIT_MAGNITUDE)
    state.r_code_to_gen[idx] = r0
    state.bias_edge[idx] = -np.tanh(0.5 * r0)
    state.reset_pending = True


def _finish(graph, source, state, rounds, tail, sweeps, edge_updates, trace, t0) -> EncodeResult:
    w = state.fixed_mask.astype(np.uint8)
    s_hat = reconstruct(graph, w)
    return EncodeResult(
        codeword=w,
        reconstruction=s_hat,
        distortion=distortion(source, s_hat),
        rounds_used=rounds,
        hardened_tail=tail,
        sweeps=sweeps,
        edge_updates=edge_updates,
        trace=trace,
        wall_time=time.perf_counter() - t0,
    )


# --------------------------------------------------------------------------
# encoders


def encode_soft(graph: FactorGraph, source, cfg: EncoderConfig, seed=None) -> EncodeResult:
    if cfg.mode != "soft":
        raise ValueError("encode_soft needs mode='soft'")
    t0 = time.perf_counter()
    rng = as_generator(seed)
    src = np.asarray(source, dtype=np.uint8)
    state = init_messages(graph, src, rng, cfg.epsilon)
    sched = cfg.schedule.with_rounds(cfg.n_schedule_rounds)
    trace, edge_updates = [], 0
    for t in range(cfg.total_iters):
        xi = sched.xi_at(t)
        beta, mu = params_from_xi(xi)
        edge_updates += state.live_idx.size
        bp_sweep(state, graph, BpParams(beta, mu, cfg.epsilon))
        if cfg.record_trace:
            trace.append({"r": t, "xi": xi, "beta": beta, "mu": mu, **sweep_stats(state)})
    # soft mode decides every bit at the end; that is its design, not a failure
    harden(graph, state, rng)
    return _finish(graph, src, state, cfg.total_iters, 0, cfg.total_iters, edge_updates, trace, t0)


def encode_soft_hard(graph: FactorGraph, source, cfg: EncoderConfig, seed=None) -> EncodeResult:
    if cfg.mode != "soft_hard":
        raise ValueError("encode_soft_hard needs mode='soft_hard'")
    t0 = time.perf_counter()
    rng = as_generator(seed)
    src = np.asarray(source, dtype=np.uint8)
    state = init_messages(graph, src, rng, cfg.epsilon)
    nu = cfg.n_schedule_rounds
    sched = cfg.schedule.with_rounds(nu)
    inner = 1 if cfg.decimation == "budgeted" else cfg.inner_iters
    m0 = state.n_free
    trace, sweeps, edge_updates, rounds = [], 0, 0, 0
    for r in range(nu):
        if state.n_free == 0:
            break
        if r > 0 and cfg.reinit_each_round:
            _reinit(state, rng)
        xi = sched.xi_at(r)
        beta, mu = params_from_xi(xi)
        params = BpParams(beta, mu, cfg.epsilon)
        for _ in range(inner):
            edge_updates += state.live_idx.size
            bp_sweep(state, graph, params)
        sweeps += inner
        rounds = r + 1
        n_free = state.n_free
        if cfg.decimation == "spread":
            k = n_free - (m0 - (r + 1) * m0 // nu)
        elif cfg.decimation == "fixed":
            k = cfg.bits_per_round
        else:
            free_mag = np.abs(state.bias_node[state.fixed_mask < 0])
            k = 1 if free_mag.max() >= SATURATION else 0
        k = min(k, n_free)
        chosen = select_targets(state, k, rng) if k else np.empty(0, np.int64)
        if cfg.record_trace:
            trace.append({
                "r": r, "xi": xi, "beta": beta, "mu": mu,
                "chosen": chosen.tolist(),
                "chosen_abs_bias": float(abs(state.bias_node[chosen[0]])) if k else None,
            })
        if k:
            fix_bits(graph, state, chosen, bits_from_bias(state.bias_node[chosen], rng))
    tail = harden(graph, state, rng)
    return _finish(graph, src, state, rounds, tail, sweeps, edge_updates, trace, t0)


def encode(graph: FactorGraph, source, cfg: EncoderConfig, seed=None) -> EncodeResult:
    """Dispatch on ``cfg.mode``."""
    if cfg.mode == "soft":
        return encode_soft(graph, source, cfg, seed)
    return encode_soft_hard(graph, source, cfg, seed)
