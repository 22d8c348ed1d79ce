"""Calibrated schedule endpoints for runs whose settings are not published.

Values come from ``demos/calibrate_presets.py`` (root seed 2024, 40 seeds):
a grid search for the best constant xi, then a small grid of scheduled
endpoints around it. Semi-regular codes were calibrated at N=2000 with the
soft-hard encoder (100 rounds); the soft encoder on the irregular ensemble
was calibrated at N=1000 with 100 sweeps.
"""

from __future__ import annotations

from .schedule import Schedule

__all__ = ["SEMI_REGULAR_PRESETS", "SOFT_PRESETS", "arms_for"]


def _arms(xi_const: float, lo: float, hi: float) -> dict[str, Schedule]:
    return {
        "constant": Schedule("constant", xi_const),
        "linear": Schedule("linear", lo, hi),
        "exponential": Schedule("exponential", lo, hi),
    }


# keyed by generator degree K, rate 1/2
SEMI_REGULAR_PRESETS = {
    3: _arms(0.16, 0.128, 0.192),
    4: _arms(0.14, 0.14, 0.154),
    5: _arms(0.18, 0.18, 0.198),
}

# soft encoder, irregular ensemble, rate 1/2
SOFT_PRESETS = _arms(0.15, 0.105, 0.225)


def arms_for(presets: dict[str, Schedule], labels=("constant", "linear", "exponential")):
    """Return ``(label, schedule)`` pairs in a fixed order."""
    return [(label, presets[label]) for label in labels]
