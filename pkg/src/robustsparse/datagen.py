"""Synthetic heavy-tailed regression data and adversarial contamination."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import RegressionSample

FAMILIES = ("gaussian", "student_t", "pareto_symmetric", "scaled_rademacher")


@dataclass(frozen=True)
class DistributionSpec:
    """A zero-mean, unit-variance base family with finite fourth moment.

    ``param`` is the tail index: degrees of freedom for student_t (> 4) or
    the Pareto exponent for pareto_symmetric (> 4); unused otherwise.
    """

    family: str
    param: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; pick one of {FAMILIES}")
        if self.family == "student_t":
            if self.param is None or not self.param > 4:
                raise ValueError("student_t requires param (nu) > 4 for finite kurtosis")
        if self.family == "pareto_symmetric":
            if self.param is None or not self.param > 4:
                raise ValueError("pareto_symmetric requires param (alpha) > 4 for finite kurtosis")

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.family == "gaussian":
            return rng.standard_normal(size)
        if self.family == "student_t":
            nu = self.param
            return rng.standard_t(nu, size) / np.sqrt(nu / (nu - 2.0))
        if self.family == "pareto_symmetric":
            # symmetrized classical Pareto on [1, inf), then variance-normalized
            alpha = self.param
            p = 1.0 + rng.pareto(alpha, size)
            signs = rng.integers(0, 2, size) * 2.0 - 1.0
            return signs * p / np.sqrt(alpha / (alpha - 2.0))
        return rng.integers(0, 2, size) * 2.0 - 1.0

    def coordinate_kurtosis(self) -> float:
        """Population E z^4 of the standardized scalar family."""
        if self.family == "gaussian":
            return 3.0
        if self.family == "student_t":
            nu = self.param
            return 3.0 * (nu - 2.0) / (nu - 4.0)
        if self.family == "pareto_symmetric":
            alpha = self.param
            return (alpha - 2.0) ** 2 / (alpha * (alpha - 4.0))
        return 1.0

    def directional_kurtosis_bound(self) -> float:
        """Bound on E<v, z>^4 over unit v for i.i.d. coordinates of this family.

        For independent coordinates E<v,z>^4 = 3 + (k - 3) sum v_j^4 with k the
        coordinate kurtosis, so the supremum is max(3, k).
        """
        return max(3.0, self.coordinate_kurtosis())


@dataclass(frozen=True)
class TrueModel:
    """Ground truth for synthetic runs: coefficients, covariance, and moments."""

    beta_star: np.ndarray
    Sigma: np.ndarray
    s: int
    sigma: float  # first-absolute-moment bound on the noise
    K: float  # directional kurtosis constant (K^4 bounds fourth moments)

    def __post_init__(self):
        beta = np.asarray(self.beta_star, dtype=float).reshape(-1)
        Sigma = np.asarray(self.Sigma, dtype=float)
        object.__setattr__(self, "beta_star", beta)
        object.__setattr__(self, "Sigma", Sigma)
        if Sigma.shape != (beta.size, beta.size):
            raise ValueError("Sigma shape does not match beta_star length")
        if int(np.count_nonzero(beta)) != self.s:
            raise ValueError(
                f"beta_star has {np.count_nonzero(beta)} nonzeros, expected s = {self.s}"
            )
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not self.K >= 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        evals = np.linalg.eigvalsh(0.5 * (Sigma + Sigma.T))
        if evals[0] < -1e-9 * max(1.0, evals[-1]):
            raise ValueError("Sigma is not positive semidefinite")
        if np.any(np.diag(Sigma) > 1.0 + 1e-9):
            raise ValueError("diagonal of Sigma must not exceed 1")

    @property
    def d(self) -> int:
        return self.beta_star.size

    @property
    def beta_max(self) -> float:
        return float(np.abs(self.beta_star).max(initial=0.0))


CONTAMINATION_MODES = ("response_gross", "covariate_leverage", "coordinated")


@dataclass(frozen=True)
class ContaminationSpec:
    """Which rows get corrupted and how."""

    o: int
    mode: str
    magnitude: float
    outlier_set: np.ndarray | None = None  # drawn from the seed when None

    def __post_init__(self):
        if self.o < 0:
            raise ValueError(f"o must be nonnegative, got {self.o}")
        if self.mode not in CONTAMINATION_MODES:
            raise ValueError(f"unknown mode {self.mode!r}; pick one of {CONTAMINATION_MODES}")
        if not self.magnitude > 0 and self.o > 0:
            raise ValueError(f"magnitude must be positive, got {self.magnitude}")
        if self.outlier_set is not None:
            idx = np.asarray(self.outlier_set, dtype=int).reshape(-1)
            if idx.size != self.o:
                raise ValueError(f"outlier_set has {idx.size} indices, expected o = {self.o}")
            object.__setattr__(self, "outlier_set", idx)


def sqrt_psd(Sigma: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition; tolerates singular input."""
    Sigma = 0.5 * (Sigma + Sigma.T)
    evals, V = np.linalg.eigh(Sigma)
    if evals[0] < -1e-9 * max(1.0, abs(evals[-1])):
        raise ValueError("Sigma is not positive semidefinite")
    return (V * np.sqrt(np.clip(evals, 0.0, None))) @ V.T


def sample_clean(
    model: TrueModel,
    dist_x: DistributionSpec,
    dist_xi: DistributionSpec,
    n: int,
    seed: int,
) -> RegressionSample:
    """Draw y = X beta* + xi with X = Z Sigma^{1/2}, fully determined by the seed.

    Covariate rows are Sigma^{1/2} z with i.i.d. standardized coordinates z;
    the noise is sigma times a standardized draw, so E|xi| <= sigma.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    root = sqrt_psd(model.Sigma)
    Z = dist_x.draw(rng, (n, model.d))
    X = Z @ root
    xi = model.sigma * dist_xi.draw(rng, n)
    y = X @ model.beta_star + xi
    return RegressionSample(y=y, X=X)


def draw_outlier_set(n: int, o: int, seed: int) -> np.ndarray:
    """Deterministic index set of size o drawn without replacement."""
    if o > n:
        raise ValueError(f"o = {o} exceeds n = {n}")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=o, replace=False))


def contaminate(
    sample: RegressionSample,
    spec: ContaminationSpec,
    model: TrueModel,
    seed: int,
) -> RegressionSample:
    """Apply the adversary to the rows in the outlier set; others are untouched.

    response_gross adds sqrt(n) * magnitude * (random sign) to the responses.
    covariate_leverage shifts covariate rows by magnitude along one fixed
    random unit direction. coordinated shifts covariates along beta*'s
    direction and replaces the responses with the anti-signal -X_i' beta*.
    """
    if spec.o > sample.n:
        raise ValueError(f"o = {spec.o} exceeds n = {sample.n}")
    if spec.o == 0:
        return sample
    rng = np.random.default_rng(seed)
    idx = spec.outlier_set
    if idx is None:
        idx = np.sort(rng.choice(sample.n, size=spec.o, replace=False))
    y = sample.y.copy()
    X = sample.X.copy()
    if spec.mode == "response_gross":
        signs = rng.integers(0, 2, spec.o) * 2.0 - 1.0
        y[idx] += np.sqrt(sample.n) * spec.magnitude * signs
    elif spec.mode == "covariate_leverage":
        u = rng.standard_normal(sample.d)
        u /= np.linalg.norm(u)
        X[idx] += spec.magnitude * u
    else:  # coordinated: leverage along beta* and responses consistent with -beta*
        norm = np.linalg.norm(model.beta_star)
        if norm == 0:
            raise ValueError("coordinated mode requires a nonzero beta_star")
        u = model.beta_star / norm
        X[idx] += spec.magnitude * u
        y[idx] = -(X[idx] @ model.beta_star)
    return RegressionSample(y=y, X=X)


def empirical_kurtosis(X: np.ndarray, n_dirs: int = 50, seed: int = 0) -> float:
    """Worst observed ratio mean<v,x>^4 / (mean<v,x>^2)^2 over coordinates and
    random unit directions; estimates the fourth-moment constant K^4.

    Directions with variance below 1e-12 are skipped.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if n < 4:
        raise ValueError(f"need n >= 4 samples, got {n}")
    Xc = X - X.mean(axis=0)
    rng = np.random.default_rng(seed)
    dirs = [np.eye(d)[j] for j in range(d)]
    for _ in range(n_dirs):
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        dirs.append(v)
    worst = 0.0
    for v in dirs:
        t = Xc @ v
        m2 = float(np.mean(t * t))
        if m2 < 1e-12:
            continue
        m4 = float(np.mean(t**4))
        worst = max(worst, m4 / (m2 * m2))
    return worst


# --- CSV / sidecar interchange -------------------------------------------------

def write_sample_csv(path, sample: RegressionSample) -> None:
    """Header row then one row per observation: y first, then x_1..x_d."""
    path = Path(path)
    header = ",".join(["y"] + [f"x_{j + 1}" for j in range(sample.d)])
    data = np.column_stack([sample.y, sample.X])
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_sample_csv(path) -> RegressionSample:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return RegressionSample(y=data[:, 0], X=data[:, 1:])


def write_truth_sidecar(path, model: TrueModel, spec: ContaminationSpec | None,
                        outliers: np.ndarray | None, seed: int) -> None:
    payload = {
        "beta_star": model.beta_star.tolist(),
        "sigma_cov": model.Sigma.tolist(),
        "s": int(model.s),
        "sigma_noise": float(model.sigma),
        "kurtosis_k": float(model.K),
        "seed": int(seed),
        "outliers": [] if outliers is None else [int(i) for i in outliers],
        "contamination_mode": None if spec is None else spec.mode,
        "contamination_magnitude": None if spec is None else float(spec.magnitude),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_truth_sidecar(path) -> dict:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    payload["beta_star"] = np.asarray(payload["beta_star"], dtype=float)
    payload["sigma_cov"] = np.asarray(payload["sigma_cov"], dtype=float)
    payload["outliers"] = np.asarray(payload["outliers"], dtype=int)
    return payload
