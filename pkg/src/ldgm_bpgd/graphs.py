"""
Bipartite LDGM factor graphs.

A graph has ``n_generators`` generator nodes (one per source bit) and
``n_codebits`` code-bit nodes. Edges are stored once, sorted by
``(generator, codebit)``, so two graphs built from the same edge set are
identical regardless of the order the edges were supplied in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Mapping

import numpy as np

from ._rng import as_generator

__all__ = [
    "DegreeDistribution",
    "DegreeProfile",
    "FactorGraph",
    "GraphError",
    "OPTIMIZED_IRREGULAR",
    "build_irregular",
    "build_semi_regular",
    "code_rate_rows",
    "degree_stats",
    "load_graph",
    "save_graph",
]


class GraphError(ValueError):
    """Invalid graph parameters or a graph that violates its invariants."""


def code_rate_rows(n_source: int, rate: float) -> int:
    """Number of code bits for ``n_source`` generators at ``rate``.

    Uses Python's ``round`` (ties to even), so ``R = 1/2`` maps exactly.
    """
    return int(round(rate * n_source))


@dataclass(frozen=True, eq=False)
class FactorGraph:
    """Immutable LDGM factor graph.

    Parameters
    ----------
    n_generators, n_codebits : int
        ``N`` and ``M``.
    gen, code : ndarray of int
        Edge endpoint arrays. Edge ``e`` joins generator ``gen[e]`` and
        code bit ``code[e]``.
    """

    n_generators: int
    n_codebits: int
    gen: np.ndarray
    code: np.ndarray
    # CSR views, filled in __post_init__
    gen_ptr: np.ndarray = field(init=False, repr=False)
    code_order: np.ndarray = field(init=False, repr=False)
    code_ptr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, m = int(self.n_generators), int(self.n_codebits)
        if n < 1 or m < 1:
            raise GraphError("graph needs at least one generator and one code bit")
        gen = np.asarray(self.gen, dtype=np.int64).ravel()
        code = np.asarray(self.code, dtype=np.int64).ravel()
        if gen.shape != code.shape:
            raise GraphError("edge endpoint arrays differ in length")
        if gen.size and (gen.min() < 0 or gen.max() >= n):
            raise GraphError("generator index out of range")
        if code.size and (code.min() < 0 or code.max() >= m):
            raise GraphError("code-bit index out of range")
        order = np.lexsort((code, gen))
        gen, code = gen[order], code[order]
        if gen.size > 1:
            dup = (gen[1:] == gen[:-1]) & (code[1:] == code[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise GraphError(f"parallel edge ({gen[k]}, {code[k]})")
        gen_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(gen, minlength=n), out=gen_ptr[1:])
        code_order = np.argsort(code, kind="stable")
        code_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(code, minlength=m), out=code_ptr[1:])
        for arr in (gen, code, gen_ptr, code_order, code_ptr):
            arr.setflags(write=False)
        object.__setattr__(self, "n_generators", n)
        object.__setattr__(self, "n_codebits", m)
        object.__setattr__(self, "gen", gen)
        object.__setattr__(self, "code", code)
        object.__setattr__(self, "gen_ptr", gen_ptr)
        object.__setattr__(self, "code_order", code_order)
        object.__setattr__(self, "code_ptr", code_ptr)

    @property
    def n_edges(self) -> int:
        return int(self.gen.size)

    @property
    def rate(self) -> float:
        return self.n_codebits / self.n_generators

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edge list as ``(generator, codebit)`` pairs."""
        return list(zip(self.gen.tolist(), self.code.tolist()))

    def gen_neighbors(self, a: int) -> np.ndarray:
        """Code bits adjacent to generator ``a`` (the set V(a))."""
        return self.code[self.gen_ptr[a]:self.gen_ptr[a + 1]]

    def code_neighbors(self, i: int) -> np.ndarray:
        """Generators adjacent to code bit ``i`` (the set C(i))."""
        idx = self.code_order[self.code_ptr[i]:self.code_ptr[i + 1]]
        return self.gen[idx]

    def code_edges(self, i: int) -> np.ndarray:
        """Edge indices incident to code bit ``i``."""
        return self.code_order[self.code_ptr[i]:self.code_ptr[i + 1]]

    def gen_degrees(self) -> np.ndarray:
        return np.diff(self.gen_ptr)

    def code_degrees(self) -> np.ndarray:
        return np.diff(self.code_ptr)

    def to_dense(self) -> np.ndarray:
        """Dense ``N x M`` generator matrix with entries in {0, 1}."""
        g = np.zeros((self.n_generators, self.n_codebits), dtype=np.uint8)
        g[self.gen, self.code] = 1
        return g

    def __eq__(self, other):
        if not isinstance(other, FactorGraph):
            return NotImplemented
        return (
            self.n_generators == other.n_generators
            and self.n_codebits == other.n_codebits
            and np.array_equal(self.gen, other.gen)
            and np.array_equal(self.code, other.code)
        )

    __hash__ = None

    @classmethod
    def from_edges(cls, n_generators: int, n_codebits: int, edges) -> "FactorGraph":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n_generators, n_codebits, arr[:, 0], arr[:, 1])

    @classmethod
    def from_dense(cls, matrix) -> "FactorGraph":
        mat = np.asarray(matrix)
        a, i = np.nonzero(mat % 2)
        return cls(mat.shape[0], mat.shape[1], a, i)


# --------------------------------------------------------------------------
# degree distributions


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distribution ``(lambda, rho)``.

    ``code_edge_coeffs[d]`` is the fraction of edges attached to a code bit
    of degree ``d``; ``generator_edge_coeffs`` likewise for generators.
    """

    code_edge_coeffs: Mapping[int, float]
    generator_edge_coeffs: Mapping[int, float]

    def __post_init__(self):
        for name in ("code_edge_coeffs", "generator_edge_coeffs"):
            coeffs = dict(getattr(self, name))
            if not coeffs:
                raise GraphError(f"{name} is empty")
            for d, c in coeffs.items():
                if int(d) != d or d < 1:
                    raise GraphError(f"{name}: degree {d!r} must be an integer >= 1")
                if not c >= 0:
                    raise GraphError(f"{name}: negative coefficient for degree {d}")
            total = math.fsum(coeffs.values())
            if abs(total - 1.0) > 1e-9:
                raise GraphError(f"{name} sums to {total!r}, not 1")
            object.__setattr__(self, name, {int(d): float(c) for d, c in sorted(coeffs.items())})

    @classmethod
    def normalized(cls, code_edge_coeffs, generator_edge_coeffs) -> "DegreeDistribution":
        """Build a distribution after rescaling each side to sum to one."""
        def norm(c):
            s = math.fsum(c.values())
            return {d: v / s for d, v in c.items()}
        return cls(norm(dict(code_edge_coeffs)), norm(dict(generator_edge_coeffs)))

    @staticmethod
    def _node_fractions(coeffs: Mapping[int, float]) -> dict[int, float]:
        w = {d: c / d for d, c in coeffs.items() if c > 0}
        s = math.fsum(w.values())
        return {d: v / s for d, v in w.items()}

    def code_node_fractions(self) -> dict[int, float]:
        return self._node_fractions(self.code_edge_coeffs)

    def generator_node_fractions(self) -> dict[int, float]:
        return self._node_fractions(self.generator_edge_coeffs)

    def mean_code_degree(self) -> float:
        return 1.0 / math.fsum(c / d for d, c in self.code_edge_coeffs.items())

    def mean_generator_degree(self) -> float:
        return 1.0 / math.fsum(c / d for d, c in self.generator_edge_coeffs.items())

    def design_rate(self) -> float:
        """``M/N`` implied by equal edge counts on both sides."""
        return self.mean_generator_degree() / self.mean_code_degree()


# lambda(x) = x^6, rho(x) = 0.275698x + 0.25537x^2 + 0.076598x^3 + 0.39233x^8.
# The published rho coefficients sum to 0.999996; they are rescaled to one.
OPTIMIZED_IRREGULAR = DegreeDistribution.normalized(
    {7: 1.0},
    {2: 0.275698, 3: 0.25537, 4: 0.076598, 9: 0.39233},
)


@dataclass(frozen=True)
class DegreeProfile:
    max_code_degree: int
    mean_code_degree: float
    max_gen_degree: int
    mean_gen_degree: float
    code_hist: dict[int, int]
    gen_hist: dict[int, int]

    # aliases used by the stability analysis
    @property
    def d_v(self) -> int:
        return self.max_code_degree

    @property
    def d_c(self) -> int:
        return self.max_gen_degree


def _hist(deg: np.ndarray) -> dict[int, int]:
    vals, counts = np.unique(deg, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def degree_stats(graph: FactorGraph) -> DegreeProfile:
    cd, gd = graph.code_degrees(), graph.gen_degrees()
    e = graph.n_edges
    return DegreeProfile(
        max_code_degree=int(cd.max()),
        mean_code_degree=e / graph.n_codebits,
        max_gen_degree=int(gd.max()),
        mean_gen_degree=e / graph.n_generators,
        code_hist=_hist(cd),
        gen_hist=_hist(gd),
    )


# --------------------------------------------------------------------------
# constructions


def build_semi_regular(n_source: int, rate: float, gen_degree: int, seed=None) -> FactorGraph:
    """Ising-model ensemble: every generator has degree ``gen_degree``.

    Each of a generator's sockets picks a code bit uniformly at random; a
    pick that repeats an earlier neighbour of the same generator is redrawn.
    """
    n, k = int(n_source), int(gen_degree)
    if n < 1:
        raise GraphError("n_source must be >= 1")
    if not 0 < rate <= 1:
        raise GraphError("rate must lie in (0, 1]")
    if k < 1:
        raise GraphError("gen_degree must be >= 1")
    m = code_rate_rows(n, rate)
    if m < 1:
        raise GraphError(f"rate {rate} gives zero code bits for N={n}")
    if k > m:
        raise GraphError(f"gen_degree {k} exceeds the {m} available code bits")
    rng = as_generator(seed)
    picks = rng.integers(0, m, size=(n, k))
    # column-by-column redraw keeps earlier sockets fixed, as in sequential sampling
    for col in range(1, k):
        while True:
            clash = (picks[:, :col] == picks[:, col:col + 1]).any(axis=1)
            if not clash.any():
                break
            picks[clash, col] = rng.integers(0, m, size=int(clash.sum()))
    gen = np.repeat(np.arange(n), k)
    return FactorGraph(n, m, gen, picks.ravel())


def _largest_remainder(total: int, fractions: Mapping[int, float]) -> dict[int, int]:
    degs = sorted(fractions)
    raw = np.array([total * fractions[d] for d in degs])
    counts = np.floor(raw).astype(np.int64)
    left = total - int(counts.sum())
    # leftover nodes go to the largest remainders, ties to the higher degree
    order = sorted(range(len(degs)), key=lambda j: (-(raw[j] - counts[j]), -degs[j]))
    for j in order[:left]:
        counts[j] += 1
    return {d: int(c) for d, c in zip(degs, counts)}


def _balance_counts(counts: dict[int, int], target_edges: int) -> dict[int, int]:
    """Move nodes between degree classes until the socket total matches.

    Each step moves one node; the chosen move is the one with the largest
    socket change not overshooting the gap, and among equal changes the one
    touching the highest degree classes.
    """
    counts = dict(counts)
    degs = sorted(counts)
    gap = target_edges - sum(d * c for d, c in counts.items())
    while gap != 0:
        best = None
        for src in degs:
            if counts[src] == 0:
                continue
            for dst in degs:
                step = dst - src
                if step == 0 or (step > 0) != (gap > 0) or abs(step) > abs(gap):
                    continue
                key = (abs(step), max(src, dst), dst)
                if best is None or key > best[0]:
                    best = (key, src, dst)
        if best is None:
            break
        _, src, dst = best
        counts[src] -= 1
        counts[dst] += 1
        gap -= dst - src
    return counts


def _degree_sequence(counts: Mapping[int, int]) -> np.ndarray:
    return np.concatenate([np.full(c, d, dtype=np.int64) for d, c in sorted(counts.items())])


def _adjust_sockets(deg: np.ndarray, gap: int) -> np.ndarray:
    """Add (gap > 0) or remove sockets on the highest-degree nodes."""
    deg = deg.copy()
    order = np.argsort(-deg, kind="stable")
    step = 1 if gap > 0 else -1
    j = 0
    while gap != 0:
        node = order[j % deg.size]
        if deg[node] + step >= 1:
            deg[node] += step
            gap -= step
        j += 1
    return deg


def _remove_parallel_edges(gen: np.ndarray, code: np.ndarray, rng, max_passes: int = 1000):
    """Swap code endpoints of duplicate edges with random partner edges."""
    m_key = int(code.max()) + 1
    for _ in range(max_passes):
        key = gen * m_key + code
        order = np.argsort(key, kind="stable")
        sk = key[order]
        dup_pos = np.flatnonzero(sk[1:] == sk[:-1]) + 1
        if dup_pos.size == 0:
            return gen, code
        present = set(key.tolist())
        for e in order[dup_pos]:
            for _attempt in range(100):
                f = int(rng.integers(0, gen.size))
                if f == e:
                    continue
                k1 = gen[e] * m_key + code[f]
                k2 = gen[f] * m_key + code[e]
                if gen[e] == gen[f] or k1 in present or k2 in present:
                    continue
                present.discard(int(gen[f] * m_key + code[f]))
                present.add(int(k1))
                present.add(int(k2))
                code[e], code[f] = code[f], code[e]
                break
    raise GraphError("could not remove parallel edges; degrees too large for graph size")


def build_irregular(n_source: int, rate: float, dist: DegreeDistribution = OPTIMIZED_IRREGULAR,
                    seed=None) -> FactorGraph:
    """Configuration-model graph with the given edge-perspective distribution.

    Node counts per degree class are rounded by largest remainder. The code
    side fixes the edge total; generator counts are then shifted between
    classes until their socket total matches. Any socket gap that class
    shifts cannot close is added to or removed from the highest-degree
    generators. Parallel edges are removed by endpoint swaps, so every node
    keeps its degree.
    """
    n = int(n_source)
    if n < 1:
        raise GraphError("n_source must be >= 1")
    if not 0 < rate <= 1:
        raise GraphError("rate must lie in (0, 1]")
    m = code_rate_rows(n, rate)
    if m < 1:
        raise GraphError(f"rate {rate} gives zero code bits for N={n}")
    # consistency of the distribution with the rate is judged before node
    # counts are rounded; rounding gaps are closed below
    exp_code = m * dist.mean_code_degree()
    exp_gen = n * dist.mean_generator_degree()
    if abs(exp_code - exp_gen) * 1000 > max(exp_code, exp_gen):
        raise GraphError(
            f"edge totals disagree: {exp_code:.1f} code sockets vs {exp_gen:.1f} generator "
            f"sockets (distribution design rate {dist.design_rate():.4f}, requested {rate})"
        )
    code_counts = _largest_remainder(m, dist.code_node_fractions())
    gen_counts = _largest_remainder(n, dist.generator_node_fractions())
    e_code = sum(d * c for d, c in code_counts.items())
    gen_counts = _balance_counts(gen_counts, e_code)
    gen_deg = _degree_sequence(gen_counts)
    gap = e_code - int(gen_deg.sum())
    if gap:
        gen_deg = _adjust_sockets(gen_deg, gap)
    code_deg = _degree_sequence(code_counts)
    if gen_deg.max() > m or code_deg.max() > n:
        raise GraphError("a node degree exceeds the size of the opposite side")

    rng = as_generator(seed)
    # degree classes are assigned to random node labels
    gen_deg = gen_deg[rng.permutation(n)]
    code_deg = code_deg[rng.permutation(m)]
    gen = np.repeat(np.arange(n), gen_deg)
    code = rng.permutation(np.repeat(np.arange(m), code_deg))
    gen, code = _remove_parallel_edges(gen, code, rng)
    return FactorGraph(n, m, gen, code)


# --------------------------------------------------------------------------
# text serialization: header "N M E", then one "a i" pair per line


def _write_graph(graph: FactorGraph, fh) -> None:
    fh.write(f"{graph.n_generators} {graph.n_codebits} {graph.n_edges}\n")
    for a, i in zip(graph.gen.tolist(), graph.code.tolist()):
        fh.write(f"{a} {i}\n")


def save_graph(graph: FactorGraph, path) -> None:
    """Write the edge list to ``path`` (a filename or an open text stream)."""
    if hasattr(path, "write"):
        _write_graph(graph, path)
        return
    with open(path, "w") as fh:
        _write_graph(graph, fh)


def load_graph(path: str | PathLike) -> FactorGraph:
    with open(path) as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln and not ln.startswith("#")]
    if not lines:
        raise GraphError(f"{path}: empty graph file")
    try:
        n, m, e = (int(x) for x in lines[0].split())
    except ValueError:
        raise GraphError(f"{path}: header must be 'N M E'") from None
    body = lines[1:]
    if len(body) != e:
        raise GraphError(f"{path}: header declares {e} edges, file has {len(body)}")
    try:
        arr = np.array([[int(x) for x in ln.split()] for ln in body], dtype=np.int64).reshape(-1, 2)
    except ValueError:
        raise GraphError(f"{path}: each edge line must hold two integers") from None
    return FactorGraph(n, m, arr[:, 0], arr[:, 1])
