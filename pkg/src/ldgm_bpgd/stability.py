"""Contraction diagnostics for the BP sweep.

The map analysed here sends the vector of code-to-generator biases
``B_{i->a}`` (one entry per live edge) to its value after one sweep. The
reinforcement input ``R_i / mu`` is held fixed as an external field, so the
map depends on ``beta`` only through the generator nonlinearity.

For a clipped domain ``|B| <= 1 - eps`` each Jacobian row of that map sums
to at most ``L(beta, eps, d_v, d_c)`` (see :func:`row_sum_bound`), so
``L < 1`` makes the sweep a contraction in the infinity norm.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .bp import BpParams, MessageState, generator_messages, llr_cap
from .graphs import FactorGraph, degree_stats

__all__ = [
    "JacobianEstimate",
    "StabilityReport",
    "VacuousBound",
    "analyze",
    "code_attenuation",
    "contraction_distances",
    "empirical_jacobian",
    "one_hop_gain",
    "power_iteration",
    "row_sum_bound",
    "safe_beta_range",
    "stability_table",
    "sweep_map",
]


class VacuousBound(ValueError):
    """The row-sum bound has a non-positive denominator."""


def row_sum_bound(beta: float, epsilon: float, d_v: float, d_c: float) -> float:
    """``d_v (d_c - 1) beta (1-eps)^(d_c-2) / (1 - beta^2 (1-eps)^(2(d_c-1)))``.

    ``d_v`` is the code-bit degree and ``d_c`` the generator degree.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta={beta} outside (0, 1)")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon={epsilon} outside (0, 1)")
    if d_v < 1 or d_c < 2:
        raise ValueError("need d_v >= 1 and d_c >= 2")
    keep = 1.0 - epsilon
    denom = 1.0 - beta**2 * keep ** (2 * (d_c - 1))
    if denom <= 0.0:
        raise VacuousBound("bound vacuous: beta^2 (1-eps)^(2(d_c-1)) >= 1")
    return d_v * (d_c - 1) * beta * keep ** (d_c - 2) / denom


def one_hop_gain(u: float, b_in: float) -> float:
    """``|dR_hat / dB_k| = 2|u| / (|1-u^2| |B_k|)`` for the product ``u``."""
    if abs(u) >= 1.0:
        raise ValueError(f"|u|={abs(u)} must be < 1")
    if b_in == 0.0:
        raise ValueError("incoming bias must be nonzero")
    return 2.0 * abs(u) / (abs(1.0 - u * u) * abs(b_in))


def code_attenuation(r: float) -> float:
    """``|dB/dR| = sech^2(R/2) / 2``, never above one half."""
    return 0.5 / math.cosh(0.5 * r) ** 2


def safe_beta_range(epsilon: float, d_v: float, d_c: float, tol: float = 1e-13) -> float | None:
    """Supremum of the ``beta`` values with ``L < 1``.

    ``L`` increases in ``beta``, so the contractive set is an interval
    ``(0, beta_max)``. Returns ``None`` when ``L < 1`` on all of (0, 1).
    """
    def excess(b):
        return row_sum_bound(b, epsilon, d_v, d_c) - 1.0

    hi = 1.0 - 1e-15
    if excess(hi) < 0.0:
        return None
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# the sweep as a map on edge biases


def sweep_map(bias_edge: np.ndarray, graph: FactorGraph, params: BpParams, field=None,
              residual_source=None, live=None, return_node: bool = False):
    """One sweep applied to the live-edge bias vector ``bias_edge``.

    ``bias_edge`` has one entry per live edge (all edges when ``live`` is
    None). ``field`` is the per-code-bit reinforcement LLR added to every
    outgoing message (zero by default).
    """
    idx = np.arange(graph.n_edges) if live is None else np.flatnonzero(live)
    g, c = graph.gen[idx], graph.code[idx]
    src = np.zeros(graph.n_generators, np.uint8) if residual_source is None else residual_source
    sign = (2.0 * src.astype(np.float64) - 1.0)[g]
    r_hat = generator_messages(np.asarray(bias_edge, dtype=float), g, sign, graph.n_generators, params.beta)
    cap = llr_cap(params.epsilon)
    sums = np.bincount(c, weights=r_hat, minlength=graph.n_codebits)
    extra = 0.0 if field is None else np.asarray(field)[c]
    lim = 1.0 - params.epsilon
    r_out = np.clip(sums[c] - r_hat + extra, -cap, cap)
    out = np.clip(-np.tanh(0.5 * r_out), -lim, lim)
    if return_node:
        node = np.clip(-np.tanh(0.5 * np.clip(sums, -cap, cap)), -lim, lim)
        return out, node
    return out


def _state_context(state: MessageState | None, graph: FactorGraph, params: BpParams):
    if state is None:
        return np.zeros(graph.n_edges), None, None, None
    live = state.live
    field = state.r_node / params.mu
    return state.bias_edge[live], field, state.residual_source, live


@dataclass
class JacobianEstimate:
    matrix: np.ndarray
    inf_norm: float
    spectral_radius: float
    node_matrix: np.ndarray
    node_inf_norm: float


def power_iteration(a: np.ndarray, iters: int = 50, tol: float = 1e-8) -> float:
    """Dominant eigenvalue of the entrywise absolute value of ``a``.

    For a nonnegative matrix this bounds the spectral radius of ``a`` from
    above and stays below the infinity norm.
    """
    m = np.abs(np.asarray(a, dtype=float))
    n = m.shape[0]
    if n == 0:
        return 0.0
    x = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(iters):
        y = m @ x
        s = y.sum()
        if s == 0.0:
            return 0.0
        new = s / x.sum()
        x = y / s
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            lam = new
            break
        lam = new
    return float(lam)


def empirical_jacobian(graph: FactorGraph, state: MessageState | None, params: BpParams,
                       delta: float = 1e-5) -> JacobianEstimate:
    """Central finite-difference Jacobian of :func:`sweep_map` at ``state``.

    ``state=None`` means the all-zero bias vector with no field.
    """
    if graph.n_edges > 200:
        raise ValueError(f"finite-difference Jacobian limited to 200 edges, graph has {graph.n_edges}")
    x, field, src, live = _state_context(state, graph, params)
    x = np.asarray(x, dtype=float)
    if delta <= 1e3 * np.finfo(float).eps * max(1.0, float(np.abs(x).max(initial=0.0))):
        raise ValueError(f"step {delta} too small: central differences would cancel")
    n = x.size
    f0, node0 = sweep_map(x, graph, params, field, src, live, return_node=True)
    jac = np.zeros((n, n))
    jnode = np.zeros((node0.size, n))
    for k in range(n):
        xp, xm = x.copy(), x.copy()
        xp[k] += delta
        xm[k] -= delta
        fp, np_ = sweep_map(xp, graph, params, field, src, live, return_node=True)
        fm, nm = sweep_map(xm, graph, params, field, src, live, return_node=True)
        jac[:, k] = (fp - fm) / (2 * delta)
        jnode[:, k] = (np_ - nm) / (2 * delta)
    return JacobianEstimate(
        matrix=jac,
        inf_norm=float(np.abs(jac).sum(axis=1).max(initial=0.0)),
        spectral_radius=power_iteration(jac),
        node_matrix=jnode,
        node_inf_norm=float(np.abs(jnode).sum(axis=1).max(initial=0.0)),
    )


def contraction_distances(graph: FactorGraph, params: BpParams, x0, y0, steps: int, field=None) -> np.ndarray:
    """Infinity-norm distance between two sweep trajectories, per step."""
    x, y = np.asarray(x0, float), np.asarray(y0, float)
    out = [float(np.abs(x - y).max())]
    for _ in range(steps):
        x = sweep_map(x, graph, params, field)
        y = sweep_map(y, graph, params, field)
        out.append(float(np.abs(x - y).max()))
    return np.array(out)


# --------------------------------------------------------------------------
# reports


@dataclass
class StabilityReport:
    bound: float
    beta: float
    epsilon: float
    d_v: float
    d_c: float
    bound_mean_degrees: float | None = None
    empirical_jacobian_norm: float | None = None
    spectral_radius_estimate: float | None = None

    @property
    def contractive(self) -> bool:
        return self.bound < 1.0

    @property
    def margin(self) -> float:
        return 1.0 - self.bound


def analyze(graph: FactorGraph, params: BpParams, state: MessageState | None = None,
            measure: bool | None = None) -> StabilityReport:
    """Bound for the graph's maximum degrees, plus the mean-degree variant.

    The finite-difference measurement is added when the graph is small
    enough (at most 200 edges) unless ``measure`` says otherwise.
    """
    prof = degree_stats(graph)
    d_c = max(prof.max_gen_degree, 2)
    bound = row_sum_bound(params.beta, params.epsilon, prof.max_code_degree, d_c)
    try:
        mean_bound = row_sum_bound(params.beta, params.epsilon, prof.mean_code_degree,
                                   max(prof.mean_gen_degree, 2.0))
    except VacuousBound:
        mean_bound = None
    rep = StabilityReport(bound, params.beta, params.epsilon, prof.max_code_degree, d_c, mean_bound)
    if measure is None:
        measure = graph.n_edges <= 200
    if measure:
        est = empirical_jacobian(graph, state, params)
        rep.empirical_jacobian_norm = est.inf_norm
        rep.spectral_radius_estimate = est.spectral_radius
    return rep


STABILITY_FIELDS = ("profile", "d_v", "d_c", "beta", "epsilon", "bound", "contractive", "beta_max")


def stability_table(betas, profiles, epsilon: float = 1e-6) -> list[dict]:
    """Rows of ``L`` over a beta grid for named ``(d_v, d_c)`` profiles."""
    rows = []
    for name, (d_v, d_c) in profiles.items():
        beta_max = safe_beta_range(epsilon, d_v, d_c)
        for b in betas:
            L = row_sum_bound(b, epsilon, d_v, d_c)
            rows.append({
                "profile": name, "d_v": d_v, "d_c": d_c, "beta": b, "epsilon": epsilon,
                "bound": L, "contractive": L < 1.0,
                "beta_max": "" if beta_max is None else beta_max,
            })
    return rows


def write_stability_csv(rows, fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=STABILITY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in row.items()})
