"""GF(2) reconstruction, Hamming distortion and the binary rate-distortion curve."""

from __future__ import annotations

import numpy as np

from .graphs import FactorGraph

__all__ = [
    "binary_entropy",
    "brute_force_optimal",
    "distortion",
    "rd_distortion",
    "reconstruct",
    "shannon_rate",
]

BRUTE_FORCE_MAX_BITS = 20


def _bits(x, name="bits") -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d bit vector")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8)


def reconstruct(graph: FactorGraph, w) -> np.ndarray:
    """Return ``s_hat = G w`` over GF(2).

    ``s_hat[a]`` is the XOR of ``w`` over the neighbours of generator ``a``;
    a generator without neighbours reconstructs to 0.
    """
    w = _bits(w, "w")
    if w.size != graph.n_codebits:
        raise ValueError(f"codeword has {w.size} bits, graph has {graph.n_codebits} code bits")
    ones = np.bincount(graph.gen, weights=w[graph.code], minlength=graph.n_generators)
    return (ones.astype(np.int64) & 1).astype(np.uint8)


def distortion(s, s_hat) -> float:
    """Relative Hamming distance between two equal-length bit vectors."""
    s, s_hat = _bits(s, "s"), _bits(s_hat, "s_hat")
    if s.size != s_hat.size:
        raise ValueError(f"length mismatch: {s.size} vs {s_hat.size}")
    return float(np.count_nonzero(s != s_hat)) / s.size


def binary_entropy(p):
    """``h2(p)`` in bits; ``h2(0) = h2(1) = 0``."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p)
    h = np.where((p == 0) | (p == 1), 0.0, h)
    return float(h) if h.ndim == 0 else h


def shannon_rate(d: float) -> float:
    """``R(D) = 1 - h2(D)`` for a Bernoulli(1/2) source, ``0 <= D <= 1/2``."""
    if not 0.0 <= d <= 0.5:
        raise ValueError(f"distortion {d} outside [0, 1/2]")
    return 1.0 - binary_entropy(d)


def rd_distortion(rate: float, tol: float = 1e-12) -> float:
    """Smallest achievable distortion at ``rate``: solves ``1 - h2(D) = rate``.

    Bisection on ``[0, 1/2]``, where ``1 - h2`` is strictly decreasing.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate {rate} outside (0, 1]")
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 1.0 - binary_entropy(mid) > rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def brute_force_optimal(graph: FactorGraph, s) -> tuple[np.ndarray, float]:
    """Exhaustive search over all ``2**M`` codewords.

    Returns the lexicographically smallest minimiser ``w*`` and its distortion.
    """
    m = graph.n_codebits
    if m > BRUTE_FORCE_MAX_BITS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_BITS} code bits, got {m}")
    s = _bits(s, "s")
    if s.size != graph.n_generators:
        raise ValueError("source length does not match the graph")
    # every codeword as a row; column j of `words` is bit j (MSB first = lexicographic)
    idx = np.arange(1 << m, dtype=np.int64)
    words = ((idx[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)
    g = graph.to_dense().astype(np.int64)
    s_hat = (words.astype(np.int64) @ g.T) & 1
    errs = np.count_nonzero(s_hat != s[None, :], axis=1)
    best = int(np.argmin(errs))  # first minimum = lexicographically smallest
    return words[best].copy(), errs[best] / s.size

