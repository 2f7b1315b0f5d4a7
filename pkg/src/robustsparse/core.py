"""Shared numerical primitives: Huber loss/score, norms, soft thresholding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NumericalFailure(RuntimeError):
    """Raised when an iterative routine produces non-finite values.

    Carries the iteration index at which the failure was detected.
    """

    def __init__(self, message: str, iteration: int = -1):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class HuberParams:
    """Scale multiplier lambda_o and l1 penalty level lambda_s."""

    lambda_o: float
    lambda_s: float

    def __post_init__(self):
        if not self.lambda_o > 0:
            raise ValueError(f"lambda_o must be positive, got {self.lambda_o}")
        if self.lambda_s < 0:
            raise ValueError(f"lambda_s must be nonnegative, got {self.lambda_s}")


@dataclass(frozen=True)
class RegressionSample:
    """Responses y (length n) and design matrix X (n by d)."""

    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"row count of X ({X.shape[0]}) must equal length of y ({y.shape[0]})"
            )
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise ValueError("sample contains non-finite entries")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def huber_loss(t):
    """Quadratic-to-linear loss: t^2/2 for |t| <= 1, |t| - 1/2 beyond the knee.

    Accepts scalars or arrays, elementwise.
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = np.where(a <= 1.0, 0.5 * t * t, a - 0.5)
    return float(out) if out.ndim == 0 else out

def huber_score(t):
    """Derivative of :func:`huber_loss`: t inside the knee, sign(t) outside.

    The displayed piecewise form in some write-ups swaps the branch labels;
    the true derivative (implemented here) equals clip(t, -1, 1), which is
    bounded by 1 and 1-Lipschitz.
    """
    t = np.asarray(t, dtype=float)
    out = np.clip(t, -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def soft_threshold(v: np.ndarray, kappa: float) -> np.ndarray:
    """Elementwise sgn(v) * max(|v| - kappa, 0); the prox of kappa * l1."""
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


def sigma_norm(v: np.ndarray, Sigma: np.ndarray) -> float:
    """sqrt(v' Sigma v) for symmetric PSD Sigma.

    Raises ValueError if the quadratic form is negative beyond tolerance
    (non-PSD input).
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.shape != (v.size, v.size):
        raise ValueError(
            f"Sigma shape {Sigma.shape} does not match vector length {v.size}"
        )
    q = float(v @ Sigma @ v)
    scale = float(np.abs(Sigma).max(initial=0.0)) * float(v @ v)
    if q < -1e-9 * (1.0 + scale):
        raise ValueError(f"negative quadratic form ({q}); Sigma is not PSD")
    return float(np.sqrt(max(q, 0.0)))
