"""l1-penalized Huber regression and the squared-loss lasso baseline.

Both programs are composite (smooth + l1) and share one solver: monotone
FISTA with gradient-based adaptive restart, stopped on the KKT residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import HuberParams, NumericalFailure, RegressionSample, huber_loss, huber_score, soft_threshold


@dataclass
class SolverOptions:
    max_iter: int = 20000
    tol_kkt: float | None = None  # None -> 1e-8 * (1 + ||X'y||_inf / n)
    step_rule: str = "fixed"  # "fixed" (Lipschitz bound) or "backtracking"
    restart: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol_kkt is not None and not self.tol_kkt > 0:
            raise ValueError(f"tol_kkt must be positive, got {self.tol_kkt}")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")


@dataclass
class FitResult:
    beta_hat: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    objective_trace: np.ndarray = field(default=None, repr=False)


def huber_objective(beta: np.ndarray, data: RegressionSample, hp: HuberParams) -> float:
    """sum_i lambda_o^2 H((y_i - x_i'beta) / (lambda_o sqrt(n))) + lambda_s ||beta||_1."""
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.size != data.d:
        raise ValueError(f"beta has length {beta.size}, expected {data.d}")
    scale = hp.lambda_o * np.sqrt(data.n)
    t = (data.y - data.X @ beta) / scale
    return float(hp.lambda_o**2 * np.sum(huber_loss(t)) + hp.lambda_s * np.abs(beta).sum())


def huber_smooth_gradient(beta: np.ndarray, data: RegressionSample, hp: HuberParams) -> np.ndarray:
    """Gradient of the smooth part: -(lambda_o / sqrt(n)) * X' h(residual / (lambda_o sqrt(n)))."""
    beta = np.asarray(beta, dtype=float).reshape(-1)
    scale = hp.lambda_o * np.sqrt(data.n)
    t = (data.y - data.X @ beta) / scale
    return -(hp.lambda_o / np.sqrt(data.n)) * (data.X.T @ huber_score(t))


def kkt_residual(beta: np.ndarray, grad: np.ndarray, lambda_s: float) -> float:
    """l_inf distance of -grad from lambda_s * subdifferential of ||beta||_1.

    Coordinates at zero contribute max(|g_j| - lambda_s, 0); the rest
    contribute |g_j + lambda_s * sgn(beta_j)|.
    """
    beta = np.asarray(beta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    at_zero = beta == 0.0
    res = np.where(
        at_zero,
        np.maximum(np.abs(grad) - lambda_s, 0.0),
        np.abs(grad + lambda_s * np.sign(beta)),
    )
    return float(res.max(initial=0.0))


def lipschitz_bound(X: np.ndarray) -> float:
    """Upper bound lambda_max(X'X)/n on the smooth-part gradient Lipschitz constant."""
    n, d = X.shape
    G = X.T @ X if d <= n else X @ X.T
    if G.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(G)[-1]) / n


def _default_tol(data: RegressionSample) -> float:
    grad_scale = float(np.abs(data.X.T @ data.y).max(initial=0.0)) / data.n
    return 1e-8 * (1.0 + grad_scale)


def _fista(smooth, lambda_s: float, d: int, L: float, opts: SolverOptions, tol: float) -> FitResult:
    """Monotone FISTA on smooth(beta) -> (value, grad) plus lambda_s * l1.

    Starts at beta = 0. The monotone iterate never increases the objective;
    momentum is reset when the prox step and the momentum direction disagree.
    """
    backtrack = opts.step_rule == "backtracking"
    if L <= 0.0:
        L = 1.0
    Lk = L if not backtrack else max(L / 64.0, 1e-12)

    x = np.zeros(d)
    x_prev = x
    y = x
    z_prev = x
    fx_s, _ = smooth(x)
    Fx = fx_s  # ||0||_1 = 0
    t = 1.0
    trace = [Fx]
    kkt = np.inf
    converged = False
    k = 0

    for k in range(1, opts.max_iter + 1):
        fy, gy = smooth(y)
        while True:
            z = soft_threshold(y - gy / Lk, lambda_s / Lk)
            fz, gz = smooth(z)
            if not backtrack:
                break
            dz = z - y
            if fz <= fy + gy @ dz + 0.5 * Lk * (dz @ dz) + 1e-12 * abs(fy):
                break
            Lk *= 2.0
        Fz = fz + lambda_s * np.abs(z).sum()
        if not np.isfinite(Fz):
            raise NumericalFailure(f"objective became non-finite at iteration {k}", iteration=k)

        kkt = kkt_residual(z, gz, lambda_s)
        if kkt <= tol:
            x = z
            Fx = Fz
            trace.append(Fx)
            converged = True
            break

        if Fz <= Fx:
            x_new, Fx_new = z, Fz
        else:
            x_new, Fx_new = x, Fx

        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y_new = x_new + (t / t_new) * (z - x_new) + ((t - 1.0) / t_new) * (x_new - x_prev)
        if opts.restart and float((y - z) @ (z - z_prev)) > 0.0:
            t_new = 1.0
            y_new = x_new

        x_prev, x, Fx = x, x_new, Fx_new
        y, t, z_prev = y_new, t_new, z
        trace.append(Fx)
        if backtrack:
            Lk = max(Lk * 0.9, 1e-12)

    if not converged:
        # report the KKT residual at the monotone iterate actually returned
        _, gx = smooth(x)
        kkt = kkt_residual(x, gx, lambda_s)

    return FitResult(
        beta_hat=x,
        objective=float(Fx),
        kkt_residual=float(kkt),
        iterations=k,
        converged=converged,
        objective_trace=np.asarray(trace),
    )


def fit_penalized_huber(
    data: RegressionSample, hp: HuberParams, opts: SolverOptions | None = None
) -> FitResult:
    """Solve argmin_beta sum_i lambda_o^2 H((y_i - x_i'beta)/(lambda_o sqrt(n))) + lambda_s ||beta||_1."""
    opts = opts or SolverOptions()
    scale = hp.lambda_o * np.sqrt(data.n)
    X, y = data.X, data.y
    n = data.n

    def smooth(beta):
        t = (y - X @ beta) / scale
        f = hp.lambda_o**2 * float(np.sum(huber_loss(t)))
        g = -(hp.lambda_o / np.sqrt(n)) * (X.T @ huber_score(t))
        return f, g

    tol = opts.tol_kkt if opts.tol_kkt is not None else _default_tol(data)
    return _fista(smooth, hp.lambda_s, data.d, lipschitz_bound(X), opts, tol)


def lasso_objective(beta: np.ndarray, data: RegressionSample, lambda_s: float) -> float:
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.size != data.d:
        raise ValueError(f"beta has length {beta.size}, expected {data.d}")
    r = data.y - data.X @ beta
    return float(0.5 * (r @ r) / data.n + lambda_s * np.abs(beta).sum())


def fit_lasso_baseline(
    data: RegressionSample, lambda_s: float, opts: SolverOptions | None = None
) -> FitResult:
    """Solve argmin_beta (1/2n) ||y - X beta||_2^2 + lambda_s ||beta||_1."""
    if lambda_s < 0:
        raise ValueError(f"lambda_s must be nonnegative, got {lambda_s}")
    opts = opts or SolverOptions()
    X, y = data.X, data.y
    n = data.n

    def smooth(beta):
        r = y - X @ beta
        return float(0.5 * (r @ r) / n), -(X.T @ r) / n

    tol = opts.tol_kkt if opts.tol_kkt is not None else _default_tol(data)
    return _fista(smooth, lambda_s, data.d, lipschitz_bound(X), opts, tol)
