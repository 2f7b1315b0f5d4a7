"""Coordinate-wise clipping of covariates to a fixed level."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThresholdParam:
    """Clipping level tau_x applied to every matrix entry."""

    tau_x: float

    def __post_init__(self):
        if not self.tau_x > 0:
            raise ValueError(f"tau_x must be positive, got {self.tau_x}")


def threshold_matrix(X: np.ndarray, tau_x: float) -> np.ndarray:
    """Clip each entry to sgn(x) * min(|x|, tau_x).

    Responses are never touched by this stage; only covariates are clipped.
    """
    if not tau_x > 0:
        raise ValueError(f"tau_x must be positive, got {tau_x}")
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    return np.clip(X, -tau_x, tau_x)
