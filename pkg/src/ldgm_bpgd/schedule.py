"""Softness schedules.

A schedule maps a round index ``r`` to an auxiliary value ``xi_r`` in
(0, 1), from which the generator gain ``beta = (1 - xi) / (1 + xi)`` and the
softness ``mu = 1 / xi`` follow. ``xi`` grows over the run, so ``beta`` and
``mu`` both shrink while the reinforcement weight ``1 / mu = xi`` grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = ["Schedule", "params_from_xi", "xi_from_mu", "SCHEDULE_KINDS", "TABLE1_PRESETS"]

SCHEDULE_KINDS = ("constant", "linear", "exponential")


@dataclass(frozen=True)
class Schedule:
    kind: Literal["constant", "linear", "exponential"]
    xi_start: float
    xi_end: float | None = None
    rounds: int = 1

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        end = self.xi_start if self.xi_end is None else self.xi_end
        object.__setattr__(self, "xi_end", float(end))
        object.__setattr__(self, "xi_start", float(self.xi_start))
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise ValueError("rounds must be an integer >= 1")
        object.__setattr__(self, "rounds", int(self.rounds))
        for v in (self.xi_start, self.xi_end):
            if not 0.0 < v < 1.0:
                raise ValueError(f"xi value {v} outside (0, 1)")
        if self.kind == "constant":
            if self.xi_end != self.xi_start:
                raise ValueError("constant schedule needs xi_start == xi_end")
        elif not self.xi_start < self.xi_end:
            raise ValueError(f"{self.kind} schedule needs xi_start < xi_end")

    def with_rounds(self, rounds: int) -> "Schedule":
        return Schedule(self.kind, self.xi_start, self.xi_end, rounds)

    def progress(self, r: int) -> float:
        """Fraction ``t_r = r / (rounds - 1)``; 0 for a single-round schedule."""
        if int(r) != r or not 0 <= r < self.rounds:
            raise IndexError(f"round {r} outside [0, {self.rounds})")
        if self.rounds == 1:
            return 0.0
        return r / (self.rounds - 1)

    def _interpolate(self, t):
        if self.kind == "linear":
            return self.xi_start + t * (self.xi_end - self.xi_start)
        return self.xi_start * (self.xi_end / self.xi_start) ** t

    def xi_at(self, r: int) -> float:
        t = self.progress(r)
        if self.kind == "constant" or t == 0.0:
            return self.xi_start
        if t == 1.0:
            return self.xi_end
        return float(self._interpolate(t))

    def params_at(self, r: int) -> tuple[float, float]:
        return params_from_xi(self.xi_at(r))

    def xi_values(self) -> np.ndarray:
        """``xi_r`` for every round, equal to ``[xi_at(r) for r in range(rounds)]``."""
        if self.kind == "constant" or self.rounds == 1:
            return np.full(self.rounds, self.xi_start)
        t = np.arange(self.rounds) / (self.rounds - 1)
        xi = self._interpolate(t)
        xi[0], xi[-1] = self.xi_start, self.xi_end
        return xi

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant({self.xi_start:g})"
        return f"{self.kind}({self.xi_start:g}->{self.xi_end:g})"


def params_from_xi(xi: float) -> tuple[float, float]:
    """Return ``(beta, mu)`` for an auxiliary value ``xi`` in (0, 1)."""
    if not 0.0 < xi < 1.0:
        raise ValueError(f"xi={xi} outside (0, 1)")
    return (1.0 - xi) / (1.0 + xi), 1.0 / xi


def xi_from_mu(mu: float) -> float:
    return 1.0 / mu


# Start/end points of the soft-hard runs at rate 1/2, keyed by block length.
TABLE1_PRESETS = {
    100: {
        "constant": Schedule("constant", 0.050),
        "linear": Schedule("linear", 0.025, 0.052),
        "exponential": Schedule("exponential", 0.025, 0.052),
    },
    1000: {
        "constant": Schedule("constant", 0.040),
        "linear": Schedule("linear", 0.022, 0.048),
        "exponential": Schedule("exponential", 0.022, 0.048),
    },
    10000: {
        "constant": Schedule("constant", 0.030),
        "linear": Schedule("linear", 0.012, 0.032),
        "exponential": Schedule("exponential", 0.012, 0.032),
    },
}
