"""Error metrics, covariance spectrum diagnostics, and rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import sigma_norm


@dataclass(frozen=True)
class ErrorTriple:
    err_l1: float
    err_l2: float
    err_sigma: float

    def __post_init__(self):
        if min(self.err_l1, self.err_l2, self.err_sigma) < 0:
            raise ValueError("error metrics must be nonnegative")


def error_metrics(beta_hat: np.ndarray, beta_star: np.ndarray, Sigma: np.ndarray) -> ErrorTriple:
    """l1, l2 and Sigma^{1/2}-weighted norms of beta_hat - beta_star."""
    beta_hat = np.asarray(beta_hat, dtype=float).reshape(-1)
    beta_star = np.asarray(beta_star, dtype=float).reshape(-1)
    if beta_hat.size != beta_star.size:
        raise ValueError(
            f"dimension mismatch: {beta_hat.size} vs {beta_star.size}"
        )
    diff = beta_hat - beta_star
    return ErrorTriple(
        err_l1=float(np.abs(diff).sum()),
        err_l2=float(np.linalg.norm(diff)),
        err_sigma=sigma_norm(diff, Sigma),
    )


ENUMERATION_GUARD = 10**6


def sparse_min_eigen(Sigma: np.ndarray, s: int) -> float:
    """Exact min over supports J, |J| = s, of lambda_min(Sigma_JJ).

    Enumerates principal submatrices; refuses when C(d, s) exceeds the guard.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    d = Sigma.shape[0]
    if Sigma.shape != (d, d):
        raise ValueError(f"Sigma must be square, got shape {Sigma.shape}")
    if not 1 <= s <= d:
        raise ValueError(f"s must lie in [1, {d}], got {s}")
    n_supports = math.comb(d, s)
    if n_supports > ENUMERATION_GUARD:
        raise ValueError(
            f"C({d}, {s}) = {n_supports} supports exceeds the enumeration guard "
            f"({ENUMERATION_GUARD}); use a sampled lower bound instead"
        )
    if s == 1:
        return float(np.diag(Sigma).min())
    best = np.inf
    for J in combinations(range(d), s):
        sub = Sigma[np.ix_(J, J)]
        best = min(best, float(np.linalg.eigvalsh(sub)[0]))
    return max(best, 0.0) if best > -1e-12 else best


def re_lower_bound(
    Sigma: np.ndarray, s: int, c_re: float, n_samples: int = 10000, seed: int = 0
) -> float:
    """Sampled estimate of the restricted-eigenvalue constant kappa.

    Minimizes ||Sigma^{1/2} v||_2 / ||v_J||_2 over random vectors in the cone
    ||v_{J^c}||_1 <= c_re ||v_J||_1, across all supports of size s.  Sampling
    cannot certify the infimum, so the returned value is an upper-biased
    estimate of the true kappa.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    d = Sigma.shape[0]
    if not 1 <= s <= d:
        raise ValueError(f"s must lie in [1, {d}], got {s}")
    if math.comb(d, s) > ENUMERATION_GUARD:
        raise ValueError("too many supports; reduce d or s")
    evals, V = np.linalg.eigh(0.5 * (Sigma + Sigma.T))
    root = (V * np.sqrt(np.clip(evals, 0.0, None))) @ V.T
    rng = np.random.default_rng(seed)
    supports = list(combinations(range(d), s))
    best = np.inf
    for k in range(n_samples):
        J = np.asarray(supports[k % len(supports)], dtype=int)
        v = np.zeros(d)
        vj = rng.standard_normal(s)
        v[J] = vj
        rest = np.setdiff1d(np.arange(d), J)
        if rest.size and k % 2 == 1:
            # random tail scaled to a uniform fraction of the cone budget
            tail = rng.standard_normal(rest.size)
            l1_budget = c_re * float(np.abs(vj).sum()) * rng.uniform()
            tail *= l1_budget / max(float(np.abs(tail).sum()), 1e-300)
            v[rest] = tail
        denom = float(np.linalg.norm(v[J]))
        if denom < 1e-300:
            continue
        ratio = float(np.linalg.norm(root @ v)) / denom
        best = min(best, ratio)
    return float(best)


def rate_fit(pairs) -> dict:
    """Least-squares line through (log x, log err); slope estimates the power law."""
    pairs = [(float(x), float(e)) for x, e in pairs]
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 points, got {len(pairs)}")
    xs = np.array([p[0] for p in pairs])
    es = np.array([p[1] for p in pairs])
    if np.any(xs <= 0) or np.any(es <= 0):
        raise ValueError("rate_fit requires strictly positive inputs")
    lx, le = np.log(xs), np.log(es)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, le, rcond=None)
    return {"slope": float(coef[0]), "intercept": float(coef[1])}
