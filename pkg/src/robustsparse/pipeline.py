"""Tuning-parameter computation and the two end-to-end estimators.

Estimator 1 clips covariates and runs the l1-penalized Huber regression.
Estimator 2 additionally computes downweighting weights from the clipped
covariates and fits on the reweighted sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import HuberParams, RegressionSample
from .evaluate import ErrorTriple
from .huber_solver import FitResult, SolverOptions, fit_penalized_huber
from .thresholding import threshold_matrix
from .weights import WeightParams, WeightResult, WeightVector, compute_weights


@dataclass(frozen=True)
class TheoryConstants:
    """Free constants of the tuning system.

    Defaults fall on the safe side of the stated side conditions (c_s = 16);
    smaller values such as c_s = 1 are accepted because practical runs need
    them, and condition reports flag the difference.
    """

    c_s: float = 16.0
    c_r: float = 6.0
    c_re: float = 3.0
    kappa: float = 1.0
    kappa_l: float = 1.0
    c_star: float = 2.0
    c_eps: float = 1.0
    delta: float = 0.05

    def __post_init__(self):
        if not self.c_s > 0:
            raise ValueError(f"c_s must be positive, got {self.c_s}")
        if not self.c_r > 0:
            raise ValueError(f"c_r must be positive, got {self.c_r}")
        if not self.c_re > 1:
            raise ValueError(f"c_re must exceed 1, got {self.c_re}")
        if not (self.kappa > 0 and self.kappa_l > 0):
            raise ValueError("kappa and kappa_l must be positive")
        if not self.c_star > 0:
            raise ValueError(f"c_star must be positive, got {self.c_star}")
        if not self.c_eps >= 1:
            raise ValueError(f"c_eps must be >= 1, got {self.c_eps}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class RadiusSet:
    """Certified radii for the weighted, l1 and l2 errors."""

    r_sigma: float
    r_1: float
    r_2: float
    c_r1: float
    c_r2: float


@dataclass(frozen=True)
class CleanTuning:
    """Clipping level and Huber parameters for the no-outlier estimator."""

    tau_x: float
    huber: HuberParams
    radii: RadiusSet


@dataclass(frozen=True)
class RobustTuning:
    """Tuning for the outlier-aware estimator, including the weight program."""

    tau_x: float
    huber: HuberParams
    radii: RadiusSet
    weight: WeightParams
    epsilon: float


def _log_ratio(d: int, delta: float) -> float:
    val = np.log(d / delta)
    if not val > 0:
        raise ValueError(f"log(d/delta) must be positive, got {val}")
    return float(val)


def _radii(s: int, lambda_s: float, tc: TheoryConstants) -> RadiusSet:
    c_r1 = tc.c_r * (1.0 + tc.c_re) / tc.kappa
    c_r2 = tc.c_r * (1.0 + tc.c_re) / tc.kappa_l
    r_sigma = 12.0 * c_r1 * np.sqrt(s) * lambda_s
    return RadiusSet(
        r_sigma=r_sigma,
        r_1=c_r1 * np.sqrt(s) * r_sigma,
        r_2=c_r2 * r_sigma,
        c_r1=c_r1,
        c_r2=c_r2,
    )


def tuning_no_outliers(
    n: int,
    d: int,
    K: float,
    sigma: float,
    s: int,
    tc: TheoryConstants,
    lambda_o_scale: float = 1.0,
    lambda_s_scale: float = 1.0,
) -> CleanTuning:
    """Closed-form tuning for clean heavy-tailed data.

    tau_x = sqrt(n / log(d/delta)); lambda_o sqrt(n) sits at its lower bound
    18 K^4 (sigma + 1); lambda_s follows the square-root-of-log-over-n law.
    The two scale factors calibrate the levels without touching the rates
    (the stated constants are far too conservative at practical sample sizes).
    """
    L = _log_ratio(d, tc.delta)
    tau_x = np.sqrt(n / L)
    lambda_o = lambda_o_scale * 18.0 * K**4 * (sigma + 1.0) / np.sqrt(n)
    lambda_s = (
        lambda_s_scale
        * tc.c_s
        * (tc.c_re + 1.0)
        / (tc.c_re - 1.0)
        * (lambda_o * np.sqrt(n))
        * np.sqrt(L / n)
    )
    return CleanTuning(
        tau_x=float(tau_x),
        huber=HuberParams(lambda_o=float(lambda_o), lambda_s=float(lambda_s)),
        radii=_radii(s, float(lambda_s), tc),
    )


def tuning_with_outliers(
    n: int,
    d: int,
    o: int,
    K: float,
    sigma: float,
    s: int,
    sigma_sqrt_op: float,
    sigma_op: float,
    tc: TheoryConstants,
    lambda_o_scale: float = 1.0,
    lambda_s_scale: float = 1.0,
) -> RobustTuning:
    """Closed-form tuning under contamination by o outliers.

    tau_x drops to the fourth root, lambda_s gains a sqrt(o/(sn)) term, and
    the weight program receives its penalty level, radius and success
    threshold. Requires epsilon = c_eps * o / n < 1 and c_star >= 1/(1-eps).
    """
    L = _log_ratio(d, tc.delta)
    eps = tc.c_eps * o / n
    if eps >= 1.0:
        raise ValueError(f"epsilon = c_eps * o / n = {eps} must be < 1")
    if tc.c_star < 1.0 / (1.0 - eps):
        raise ValueError(
            f"c_star = {tc.c_star} violates c_star >= 1/(1-eps) = {1.0 / (1.0 - eps)}"
        )
    tau_x = (n / L) ** 0.25
    lambda_o = lambda_o_scale * 18.0 * K**4 * (sigma + 1.0) / np.sqrt(n)
    c_star_prime = max(1.0 / (1.0 - eps), tc.c_star)
    c_r1 = tc.c_r * (1.0 + tc.c_re) / tc.kappa
    c_r2 = tc.c_r * (1.0 + tc.c_re) / tc.kappa_l
    lambda_s = (
        lambda_s_scale
        * tc.c_s
        * (tc.c_re + 1.0)
        / (tc.c_re - 1.0)
        * (lambda_o * np.sqrt(n))
        * (np.sqrt(L / n) + c_star_prime * sigma_sqrt_op * (c_r2 / c_r1) * np.sqrt(o / (s * n)))
    )
    radii = _radii(s, float(lambda_s), tc)
    lambda_star = tc.c_star * (
        np.sqrt(2.0) * K**2 * np.sqrt(L / n) + tau_x**2 * L / n + 2.0 * K**4 / tau_x**2
    )
    tau_suc = sigma_op * radii.r_2**2 / (1.0 - eps)
    return RobustTuning(
        tau_x=float(tau_x),
        huber=HuberParams(lambda_o=float(lambda_o), lambda_s=float(lambda_s)),
        radii=radii,
        weight=WeightParams(
            lambda_star=float(lambda_star),
            tau_suc=float(tau_suc),
            epsilon=float(eps),
            radius=float(radii.r_2),
        ),
        epsilon=float(eps),
    )


def side_conditions_no_outliers(
    n: int, d: int, K: float, s: int, tc: TheoryConstants,
    beta_max: float, beta_l1: float, r_sigma: float,
) -> dict:
    """Literal evaluation of the clean-case side conditions (each term <= 1)."""
    L = _log_ratio(d, tc.delta)
    c_r1 = tc.c_r * (1.0 + tc.c_re) / tc.kappa
    terms = {
        "kurtosis_sparsity": 9.0 * K**2 * c_r1 * np.sqrt(s * L / n),
        "beta_max_term": (K**4 / c_r1) * beta_max**0.25 * s**0.25 * (L / n) ** (7.0 / 8.0),
        "beta_l1_term": beta_l1 * K**4 * (L / n) ** 1.5,
        "r_sigma": r_sigma,
    }
    return {name: {"value": float(v), "satisfied": bool(v <= 1.0)} for name, v in terms.items()}


def side_conditions_with_outliers(
    n: int, d: int, K: float, s: int, tc: TheoryConstants,
    beta_max: float, beta_l1: float, sigma_sqrt_op: float, r_sigma: float,
) -> dict:
    """Literal evaluation of the contaminated-case side conditions (each term <= 1)."""
    L = _log_ratio(d, tc.delta)
    c_r1 = tc.c_r * (1.0 + tc.c_re) / tc.kappa
    c_r2 = tc.c_r * (1.0 + tc.c_re) / tc.kappa_l
    terms = {
        "kurtosis_quarter": K**4 * (L / n) ** 0.25,
        "beta_max_term": (K**4 / c_r1) * beta_max**0.25 * s**0.25 * (L / n) ** (3.0 / 16.0),
        "operator_term": 3.0 * K**4 * c_r1**2 / (c_r2**2 * sigma_sqrt_op) * s * np.sqrt(L / n),
        "beta_l1_term": K**4 * beta_l1 * (L / n) ** 0.75,
        "sparsity_term": 72.0 * K**4 * c_r1**2 * s * np.sqrt(L / n),
        "r_sigma": r_sigma,
    }
    return {name: {"value": float(v), "satisfied": bool(v <= 1.0)} for name, v in terms.items()}


REPORT_CSV_COLUMNS = (
    "n", "d", "s", "o", "seed",
    "err_l1", "err_l2", "err_sigma",
    "weight_fail", "kkt_residual", "iterations",
)


@dataclass
class EstimateReport:
    """Fitted coefficients plus stage diagnostics and optional scoring."""

    beta_hat: np.ndarray
    fit: FitResult
    estimator: int  # 1 or 2
    tau_x: float
    huber: HuberParams
    weights: WeightVector | None = None
    weight_value: float | None = None
    weight_fail: bool = False
    weight_uniform: bool = False
    conditions: dict | None = None
    errors: ErrorTriple | None = None
    meta: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {
            "estimator": self.estimator,
            "tau_x": self.tau_x,
            "lambda_o": self.huber.lambda_o,
            "lambda_s": self.huber.lambda_s,
            "objective": self.fit.objective,
            "kkt_residual": self.fit.kkt_residual,
            "iterations": self.fit.iterations,
            "converged": self.fit.converged,
            "weight_fail": self.weight_fail,
        }
        if self.weight_value is not None:
            rec["weight_value"] = self.weight_value
        if self.errors is not None:
            rec["err_l1"] = self.errors.err_l1
            rec["err_l2"] = self.errors.err_l2
            rec["err_sigma"] = self.errors.err_sigma
        rec.update(self.meta)
        return rec

    def format_record(self) -> str:
        parts = []
        for key, val in self.to_record().items():
            if isinstance(val, float):
                parts.append(f"{key}={val:.17g}")
            else:
                parts.append(f"{key}={val}")
        return " ".join(parts)

    def csv_row(self) -> list:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return f"{v:.17g}"
            return str(v)

        err = self.errors
        vals = {
            "n": self.meta.get("n"),
            "d": self.meta.get("d"),
            "s": self.meta.get("s"),
            "o": self.meta.get("o"),
            "seed": self.meta.get("seed"),
            "err_l1": None if err is None else err.err_l1,
            "err_l2": None if err is None else err.err_l2,
            "err_sigma": None if err is None else err.err_sigma,
            "weight_fail": self.weight_fail,
            "kkt_residual": self.fit.kkt_residual,
            "iterations": self.fit.iterations,
        }
        return [fmt(vals[c]) for c in REPORT_CSV_COLUMNS]


def estimate_i(
    sample: RegressionSample,
    tuning: CleanTuning | RobustTuning,
    opts: SolverOptions | None = None,
) -> EstimateReport:
    """Clip covariates at tau_x, then solve the penalized Huber program."""
    X_tilde = threshold_matrix(sample.X, tuning.tau_x)
    fit = fit_penalized_huber(RegressionSample(y=sample.y, X=X_tilde), tuning.huber, opts)
    return EstimateReport(
        beta_hat=fit.beta_hat,
        fit=fit,
        estimator=1,
        tau_x=tuning.tau_x,
        huber=tuning.huber,
    )


def estimate_ii(
    sample: RegressionSample,
    tuning: RobustTuning,
    opts: SolverOptions | None = None,
    weight_opts: SolverOptions | None = None,
    weight_rescale: str = "n",
) -> EstimateReport:
    """Clip, downweight, then solve the Huber program on the reweighted sample.

    The weights are multiplied by n before entering the regression so that
    unsuspicious samples keep unit influence; passing weight_rescale="raw"
    feeds the bare weights instead (which shrinks every residual by ~1/n and
    disengages the Huber knee -- kept only for comparison). When the weight
    stage fails its threshold test, the report is flagged and the fit falls
    back to uniform weights.
    """
    if weight_rescale not in ("n", "raw"):
        raise ValueError(f"weight_rescale must be 'n' or 'raw', got {weight_rescale!r}")
    X_tilde = threshold_matrix(sample.X, tuning.tau_x)
    wr: WeightResult = compute_weights(X_tilde, tuning.weight, weight_opts)
    n = sample.n
    if not wr.success:
        u = np.ones(n)
    elif wr.uniform:
        # exact unit influence on the uniform shortcut path
        u = np.ones(n) if weight_rescale == "n" else np.full(n, 1.0 / n)
    else:
        u = wr.weights.w * n if weight_rescale == "n" else wr.weights.w
    data = RegressionSample(y=u * sample.y, X=u[:, None] * X_tilde)
    fit = fit_penalized_huber(data, tuning.huber, opts)
    return EstimateReport(
        beta_hat=fit.beta_hat,
        fit=fit,
        estimator=2,
        tau_x=tuning.tau_x,
        huber=tuning.huber,
        weights=wr.weights,
        weight_value=wr.value,
        weight_fail=not wr.success,
        weight_uniform=wr.uniform,
    )
