"""Kriging, GE-Kriging, Cokriging and GE-Cokriging.

Training maximizes a concentrated log marginal likelihood: the constant
mean and process variance are replaced by their closed-form estimates, so
the genetic algorithm only searches correlation lengths (and rho).

Two-fidelity models follow the two-step scheme: a (GE-)Kriging model of
the low-fidelity data, then a (GE-)Kriging model of the discrepancy
``y_H - rho * y_L(X_H)`` with rho searched jointly with the discrepancy
lengths. The final predictor conditions the joint auto-regressive GP on
all observations at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .covariance import (
    CORRELATION,
    COVARIANCE,
    HIGH,
    LOW,
    Factorization,
    assemble_linked,
    cross_covariance,
    correlation_matrix,
    factorize,
    half_solve,
    prior_variances,
    solve,
)
from .data import GradObservationSet, MultiFidelityData
from .errors import DimensionMismatch, InconsistentVariance, MissingGradients, TooFewPoints
from .kernel import Kernel, KernelParams
from .optimizer import LINEAR, LOG10, GAConfig, SearchBox, derive_seed, maximize

KRIGING = "kriging"
GEKRIGING = "gekriging"
COKRIGING = "cokriging"
GECOKRIGING = "gecokriging"
MODEL_KINDS = (KRIGING, GEKRIGING, COKRIGING, GECOKRIGING)

GRADIENT_KINDS = frozenset({GEKRIGING, GECOKRIGING})
MULTI_FIDELITY_KINDS = frozenset({COKRIGING, GECOKRIGING})

# Profiled variance of perfectly explained data is zero; keep the log finite.
SIGMA2_FLOOR = 1e-300
# Raw posterior variances below -VARIANCE_TOL * prior variance signal a bug.
VARIANCE_TOL = 1e-8
_CHUNK = 512


@dataclass(frozen=True)
class TrainConfig:
    ga: GAConfig = field(default_factory=GAConfig)
    alpha: float = 1e-14
    log10_length_bounds: tuple[float, float] = (-3.0, 2.0)
    rho_bounds: tuple[float, float] = (-5.0, 5.0)
    # log10 bounds of sigma_d^2 / sigma_L^2, only used by the joint likelihood
    log10_variance_ratio_bounds: tuple[float, float] = (-8.0, 2.0)
    joint: bool = False
    # profile rho in closed form in step 2 instead of searching it with the GA
    profile_rho: bool = True
    workers: int | None = None

    def __post_init__(self):
        if not 0 <= self.alpha <= 1e-6:
            raise ValueError("alpha must lie in [0, 1e-6]")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, ga=replace(self.ga, seed=int(seed)))


@dataclass(frozen=True)
class Hyperparameters:
    """Kernel parameters, means and rho of a trained model.

    Single-fidelity models use ``low_kernel`` / ``mean_low`` only.
    """

    low_kernel: KernelParams
    disc_kernel: KernelParams | None = None
    rho: float = 0.0
    mean_low: float = 0.0
    mean_disc: float = 0.0
    alpha: float = 1e-14

    def __post_init__(self):
        if not 0 <= self.alpha <= 1e-6:
            raise ValueError("alpha must lie in [0, 1e-6]")
        if self.disc_kernel is not None and self.disc_kernel.dim != self.low_kernel.dim:
            raise DimensionMismatch("low and discrepancy kernels differ in dimension")

    @property
    def mean_high(self) -> float:
        return self.rho * self.mean_low + self.mean_disc


@dataclass(frozen=True)
class Prediction:
    mean: float
    variance: float
    grad_mean: np.ndarray
    grad_variance: np.ndarray


@dataclass(frozen=True)
class Predictions:
    """Posterior at ``m`` query points; index it to get single ``Prediction``s."""

    X: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    grad_mean: np.ndarray
    grad_variance: np.ndarray

    def __len__(self) -> int:
        return self.mean.shape[0]

    def __getitem__(self, i: int) -> Prediction:
        return Prediction(
            float(self.mean[i]), float(self.variance[i]), self.grad_mean[i], self.grad_variance[i]
        )

    def __iter__(self) -> Iterator[Prediction]:
        return (self[i] for i in range(len(self)))

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    @property
    def grad_std(self) -> np.ndarray:
        return np.sqrt(self.grad_variance)


@dataclass(frozen=True)
class TrainedSurrogate:
    """A conditioned GP ready for prediction.

    ``low`` holds the data of a single-fidelity model, or the low-fidelity
    level of a two-fidelity model; ``high`` is None for single-fidelity
    models. ``component`` is set on gradient-baseline models (a Cokriging
    model of one gradient component).
    """

    kind: str
    hyper: Hyperparameters
    factor: Factorization
    weights: np.ndarray
    low: GradObservationSet
    high: GradObservationSet | None
    lml: float
    component: int | None = None
    info: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return self.hyper.low_kernel.dim

    @property
    def gradients(self) -> bool:
        return self.kind in GRADIENT_KINDS

    @property
    def multi_fidelity(self) -> bool:
        return self.kind in MULTI_FIDELITY_KINDS

    @property
    def jitter_used(self) -> float:
        return self.factor.jitter_used

    @property
    def prior_variance(self) -> float:
        """Variance of the predicted process far from all data."""
        kl, kd, rho, scale, target = _kernels(self.kind, self.hyper)
        return scale * prior_variances(kl, kd, rho, target)[0]

    @property
    def noise_free_variance_scale(self) -> float:
        return self.prior_variance

    def cross_covariance(self, Xstar) -> np.ndarray:
        """Covariance of the training observations with the QoI and gradients
        at ``Xstar``, in the units of the stored factor; shape (n_obs, m(1+d))."""
        kl, kd, rho, _, target = _kernels(self.kind, self.hyper)
        XH = self.high.X if self.high is not None else None
        return cross_covariance(kl, kd, rho, self.low.X, XH, self.gradients, _query_points(self, Xstar), target)


# --- likelihood pieces -----------------------------------------------------


@dataclass(frozen=True)
class ConcentratedFit:
    lml: float
    mean: float
    variance: float
    factor: Factorization


def estimate_mean_variance(F: Factorization, y, ones) -> tuple[float, float]:
    """Closed-form GLS mean and ML variance for a constant-mean GP.

    ``ones`` is the mean basis: all ones for value-only data, ones then
    zeros for gradient-augmented data (gradients of a constant vanish).
    """
    y = np.asarray(y, dtype=float)
    ones = np.asarray(ones, dtype=float)
    S = solve(F, np.column_stack([y, ones]))
    mu = float(ones @ S[:, 0]) / float(ones @ S[:, 1])
    r = y - mu * ones
    sigma2 = float(r @ (S[:, 0] - mu * S[:, 1])) / y.shape[0]
    return mu, sigma2


def _mean_basis(n: int, d: int, gradients: bool) -> np.ndarray:
    if not gradients:
        return np.ones(n)
    return np.concatenate([np.ones(n), np.zeros(n * d)])


def _correlation_factor(lengths, X, gradients: bool, alpha: float):
    return factorize(correlation_matrix(lengths, X, gradients), alpha)


def _augment(y, grads) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if grads is None:
        return y
    return np.concatenate([y, np.asarray(grads, dtype=float).reshape(-1)])


def _profiled_lml(n: int, sigma2: float, logdet: float) -> float:
    sigma2 = max(sigma2, SIGMA2_FLOOR)
    return -0.5 * n * (math.log(2 * math.pi * sigma2) + 1.0) - 0.5 * logdet


def concentrated_lml(lengths, X, y, grads=None, alpha: float = 1e-14) -> ConcentratedFit:
    """Profile log likelihood of a constant-mean (GE-)Kriging model.

    Returns the likelihood at the ML mean and variance for the given
    correlation lengths. With gradients the variance estimate divides by
    the augmented observation count ``N (1 + d)``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n, d = X.shape
    gradients = grads is not None
    F = _correlation_factor(lengths, X, gradients, alpha)
    y_aug = _augment(y, grads)
    mu, sigma2 = estimate_mean_variance(F, y_aug, _mean_basis(n, d, gradients))
    sigma2 = max(sigma2, SIGMA2_FLOOR)
    return ConcentratedFit(_profiled_lml(y_aug.shape[0], sigma2, F.logdet), mu, sigma2, F)


def discrepancy_lml(
    lengths, X, y_high, y_low, grads_high=None, grads_low=None, rho_bounds=(-5.0, 5.0), alpha: float = 1e-14
) -> tuple[ConcentratedFit, float]:
    """Concentrated likelihood of the discrepancy ``high - rho * low``, with
    rho profiled out as well.

    For fixed lengths the likelihood depends on rho only through the
    residual variance, so the best rho is the GLS coefficient of the
    low-fidelity observations in a regression of the high-fidelity ones
    on ``[mean basis, low]``. It is clipped to ``rho_bounds``; the
    likelihood is a concave quadratic in rho, so the clipped value is the
    constrained optimum. Returns ``(fit, rho)``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n, d = X.shape
    gradients = grads_high is not None
    F = _correlation_factor(lengths, X, gradients, alpha)
    yh = _augment(y_high, grads_high)
    yl = _augment(y_low, grads_low)
    ones = _mean_basis(n, d, gradients)
    Sh, Sl, S1 = solve(F, np.column_stack([yh, yl, ones])).T
    G = np.array([[ones @ S1, ones @ Sl], [yl @ S1, yl @ Sl]])
    rhs = np.array([ones @ Sh, yl @ Sh])
    beta = np.linalg.lstsq(G, rhs, rcond=1e-12)[0]
    rho = float(np.clip(beta[1], *rho_bounds))
    yd = yh - rho * yl
    Sd = Sh - rho * Sl
    mu = float(ones @ Sd) / float(ones @ S1)
    sigma2 = max(float((yd - mu * ones) @ (Sd - mu * S1)) / yh.shape[0], SIGMA2_FLOOR)
    return ConcentratedFit(_profiled_lml(yh.shape[0], sigma2, F.logdet), mu, sigma2, F), rho


# --- conditioning and prediction -------------------------------------------


def _kernels(kind: str, hyper: Hyperparameters):
    """Kernels as used in the stored factor, plus output scale and target level."""
    if kind in MULTI_FIDELITY_KINDS:
        if hyper.disc_kernel is None:
            raise ValueError("two-fidelity models need a discrepancy kernel")
        return Kernel(hyper.low_kernel), Kernel(hyper.disc_kernel), float(hyper.rho), 1.0, HIGH
    return Kernel(hyper.low_kernel).unit(), None, 0.0, hyper.low_kernel.variance, LOW


def _check_kind(kind: str):
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def build_surrogate(
    kind: str,
    hyper: Hyperparameters,
    low: GradObservationSet,
    high: GradObservationSet | None = None,
    *,
    lml: float | None = None,
    component: int | None = None,
    info: dict | None = None,
) -> TrainedSurrogate:
    """Condition a model with fixed hyperparameters on its training data.

    For two-fidelity kinds ``low`` may be empty (with ``rho = 0`` the model
    then reduces to single-fidelity GP regression on ``high``).
    """
    _check_kind(kind)
    gradients = kind in GRADIENT_KINDS
    multi = kind in MULTI_FIDELITY_KINDS
    if multi and high is None:
        raise ValueError(f"{kind} needs high-fidelity data")
    if not multi and high is not None:
        raise ValueError(f"{kind} is single-fidelity; pass its data as `low`")
    sets = [s for s in (low, high) if s is not None]
    for s in sets:
        if s.dim != hyper.low_kernel.dim:
            raise DimensionMismatch(f"data dimension {s.dim} does not match kernel dimension")
        if gradients and not s.has_grads:
            raise MissingGradients(f"{kind} needs gradient observations at every location")
    if not gradients:
        low = low.without_grads()
        high = high.without_grads() if high is not None else None

    kl, kd, rho, scale, _ = _kernels(kind, hyper)
    form = COVARIANCE if multi else CORRELATION
    XH = high.X if high is not None else None
    C = assemble_linked(kl, kd, rho, low.X, XH, gradients, form)
    F = factorize(C, hyper.alpha)

    layout = C.layout
    y = np.empty(layout.size)
    mu = np.zeros(layout.size)
    y[layout.indices(LOW)] = low.augmented_values()
    mu[np.arange(low.n)] = hyper.mean_low
    if high is not None:
        y[layout.indices(HIGH)] = high.augmented_values()
        mu[low.n + np.arange(high.n)] = hyper.mean_high
    r = y - mu
    w = solve(F, r)
    w.setflags(write=False)
    if lml is None:
        n = layout.size
        lml = -0.5 * (r @ w) / scale - 0.5 * (F.logdet + n * math.log(scale)) - 0.5 * n * math.log(2 * math.pi)
    return TrainedSurrogate(kind, hyper, F, w, low, high, float(lml), component, dict(info or {}))


def _query_points(s: TrainedSurrogate, Xstar) -> np.ndarray:
    X = np.asarray(Xstar, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1) if s.dim == 1 else X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != s.dim:
        raise DimensionMismatch(f"query points must have dimension {s.dim}, got shape {np.shape(Xstar)}")
    return X


def predict(s: TrainedSurrogate, Xstar) -> Predictions:
    """Posterior mean/variance of the QoI and of each gradient component."""
    X = _query_points(s, Xstar)
    m, d = X.shape
    kl, kd, rho, scale, target = _kernels(s.kind, s.hyper)
    mu_target = s.hyper.mean_high if s.multi_fidelity else s.hyper.mean_low
    prior_val, prior_grad = prior_variances(kl, kd, rho, target)

    mean = np.empty(m)
    var = np.empty(m)
    gmean = np.empty((m, d))
    gvar = np.empty((m, d))
    for start in range(0, m, _CHUNK):
        sl = slice(start, min(start + _CHUNK, m))
        Xc = X[sl]
        mc = Xc.shape[0]
        Kx = s.cross_covariance(Xc)
        proj = Kx.T @ s.weights
        V = half_solve(s.factor, Kx)
        red = np.einsum("ij,ij->j", V, V)
        mean[sl] = mu_target + proj[:mc]
        gmean[sl] = proj[mc:].reshape(mc, d)
        var[sl] = scale * (prior_val - red[:mc])
        gvar[sl] = scale * (prior_grad[None, :] - red[mc:].reshape(mc, d))

    _check_variances(var, scale * prior_val, "QoI")
    _check_variances(gvar, scale * prior_grad[None, :], "gradient")
    return Predictions(X, mean, np.maximum(var, 0.0), gmean, np.maximum(gvar, 0.0))


def _check_variances(raw: np.ndarray, prior, label: str):
    worst = np.min(raw / prior)
    if worst < -VARIANCE_TOL:
        raise InconsistentVariance(
            f"{label} posterior variance {np.min(raw):.3e} is negative beyond round-off "
            f"(relative {worst:.3e}); the covariance factor is inconsistent"
        )


def _require(s: TrainedSurrogate, kind: str):
    if s.kind != kind:
        raise ValueError(f"expected a {kind} surrogate, got {s.kind}")


def predict_kriging(s: TrainedSurrogate, Xstar) -> Predictions:
    """Value-only Kriging; gradient fields differentiate the posterior mean."""
    _require(s, KRIGING)
    return predict(s, Xstar)


def predict_gekriging(s: TrainedSurrogate, Xstar) -> Predictions:
    _require(s, GEKRIGING)
    return predict(s, Xstar)


def predict_cokriging(s: TrainedSurrogate, Xstar) -> Predictions:
    """Value-only Cokriging; gradient fields differentiate the posterior mean."""
    _require(s, COKRIGING)
    return predict(s, Xstar)


def predict_gecokriging(s: TrainedSurrogate, Xstar) -> Predictions:
    _require(s, GECOKRIGING)
    return predict(s, Xstar)


# --- training ----------------------------------------------------------------


def length_box(X, cfg: TrainConfig) -> SearchBox:
    """Correlation-length bounds relative to the data's extent per dimension."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    width = np.ptp(X, axis=0) if X.shape[0] else np.ones(X.shape[1])
    width = np.where(width > 0, width, 1.0)
    lo, hi = cfg.log10_length_bounds
    d = X.shape[1]
    return SearchBox(tuple(10.0**lo * width), tuple(10.0**hi * width), (LOG10,) * d)


def _fit_level(data: GradObservationSet, box: SearchBox, cfg: TrainConfig, seed: int):
    grads = data.grads

    def objective(lengths):
        return concentrated_lml(lengths, data.X, data.y, grads, cfg.alpha).lml

    res = maximize(objective, box, replace(cfg.ga, seed=seed), cfg.workers)
    fit = concentrated_lml(res.best_params, data.X, data.y, grads, cfg.alpha)
    return tuple(float(v) for v in res.best_params), fit, res


def _train_single(data: GradObservationSet, kind: str, cfg: TrainConfig) -> TrainedSurrogate:
    lengths, fit, res = _fit_level(data, length_box(data.X, cfg), cfg, cfg.ga.seed)
    hyper = Hyperparameters(
        low_kernel=KernelParams(fit.variance, lengths), mean_low=fit.mean, alpha=cfg.alpha
    )
    info = {"trace": res.trace, "jitter_search": fit.factor.jitter_used}
    return build_surrogate(kind, hyper, data, lml=fit.lml, info=info)


def train_kriging(data: GradObservationSet, cfg: TrainConfig = TrainConfig()) -> TrainedSurrogate:
    """Ordinary Kriging on values (any gradients in ``data`` are ignored)."""
    if data.n < 2:
        raise TooFewPoints(f"Kriging needs at least 2 observations, got {data.n}")
    return _train_single(data.without_grads(), KRIGING, cfg)


def train_gekriging(data: GradObservationSet, cfg: TrainConfig = TrainConfig()) -> TrainedSurrogate:
    """Gradient-enhanced Kriging on values and full gradients."""
    if not data.has_grads:
        raise MissingGradients("GE-Kriging needs gradient observations")
    if data.n * (1 + data.dim) < 2 or data.n < 1:
        raise TooFewPoints("GE-Kriging needs at least 2 augmented observations")
    return _train_single(data, GEKRIGING, cfg)


def _check_multi(data: MultiFidelityData, gradients: bool):
    if data.low.n < 2 or data.high.n < 2:
        raise TooFewPoints(
            f"two-fidelity models need at least 2 points per level, got {data.low.n} low / {data.high.n} high"
        )
    if gradients and not data.has_grads:
        raise MissingGradients("GE-Cokriging needs gradients at both fidelity levels")


def _train_two_step(data: MultiFidelityData, kind: str, cfg: TrainConfig) -> TrainedSurrogate:
    gradients = kind in GRADIENT_KINDS
    low, high = data.low, data.high
    d = data.dim
    box = length_box(low.X, cfg)
    lengths_low, fit_low, res_low = _fit_level(low, box, cfg, cfg.ga.seed)

    y_low_at_high = low.y[data.nesting]
    g_low_at_high = low.grads[data.nesting] if gradients else None
    g_high = high.grads if gradients else None
    seed2 = derive_seed(cfg.ga.seed, "discrepancy")

    if cfg.profile_rho:

        def objective(lengths):
            return discrepancy_lml(
                lengths, high.X, high.y, y_low_at_high, g_high, g_low_at_high, cfg.rho_bounds, cfg.alpha
            )[0].lml

        res = maximize(objective, box, replace(cfg.ga, seed=seed2), cfg.workers)
        lengths_d = tuple(float(v) for v in res.best_params)
        fit_d, rho = discrepancy_lml(
            lengths_d, high.X, high.y, y_low_at_high, g_high, g_low_at_high, cfg.rho_bounds, cfg.alpha
        )
    else:
        lo, hi = cfg.rho_bounds
        box2 = box + SearchBox((lo,), (hi,), (LINEAR,))

        def discrepancy(rho):
            yd = high.y - rho * y_low_at_high
            gd = g_high - rho * g_low_at_high if gradients else None
            return yd, gd

        def objective(p):
            yd, gd = discrepancy(p[d])
            return concentrated_lml(p[:d], high.X, yd, gd, cfg.alpha).lml

        res = maximize(objective, box2, replace(cfg.ga, seed=seed2), cfg.workers)
        rho = float(res.best_params[d])
        lengths_d = tuple(float(v) for v in res.best_params[:d])
        fit_d = concentrated_lml(lengths_d, high.X, *discrepancy(rho), cfg.alpha)

    hyper = Hyperparameters(
        low_kernel=KernelParams(fit_low.variance, lengths_low),
        disc_kernel=KernelParams(fit_d.variance, lengths_d),
        rho=rho,
        mean_low=fit_low.mean,
        mean_disc=fit_d.mean,
        alpha=cfg.alpha,
    )
    info = {
        "lml_low": fit_low.lml,
        "lml_discrepancy": fit_d.lml,
        "trace_low": res_low.trace,
        "trace_discrepancy": res.trace,
    }
    return build_surrogate(kind, hyper, low, high, info=info)


def joint_lml(params, data: MultiFidelityData, gradients: bool, alpha: float = 1e-14):
    """Joint two-fidelity likelihood with means and overall scale profiled out.

    ``params`` = (low lengths, discrepancy lengths, rho, variance ratio
    sigma_d^2 / sigma_L^2). Returns ``(lml, hyperparameters)``.
    """
    d = data.dim
    p = np.asarray(params, dtype=float)
    lengths_low, lengths_d, rho, ratio = p[:d], p[d : 2 * d], float(p[2 * d]), float(p[2 * d + 1])
    kl = Kernel.gaussian(1.0, lengths_low)
    kd = Kernel.gaussian(ratio, lengths_d)
    low, high = data.low, data.high
    C = assemble_linked(kl, kd, rho, low.X, high.X, gradients, COVARIANCE)
    F = factorize(C, alpha)
    layout = C.layout
    n = layout.size
    y = np.empty(n)
    y[layout.indices(LOW)] = low.augmented_values() if gradients else low.y
    y[layout.indices(HIGH)] = high.augmented_values() if gradients else high.y
    basis = np.zeros((n, 2))
    basis[: low.n, 0] = 1.0
    basis[low.n : low.n + high.n, 0] = rho
    basis[low.n : low.n + high.n, 1] = 1.0
    S = solve(F, np.column_stack([y, basis]))
    beta = np.linalg.solve(basis.T @ S[:, 1:], basis.T @ S[:, 0])
    r = y - basis @ beta
    sigma2 = max(float(r @ (S[:, 0] - S[:, 1:] @ beta)) / n, SIGMA2_FLOOR)
    lml = -0.5 * n * (math.log(2 * math.pi * sigma2) + 1.0) - 0.5 * F.logdet
    hyper = Hyperparameters(
        low_kernel=KernelParams(sigma2, tuple(lengths_low)),
        disc_kernel=KernelParams(ratio * sigma2, tuple(lengths_d)),
        rho=rho,
        mean_low=float(beta[0]),
        mean_disc=float(beta[1]),
        alpha=alpha,
    )
    return lml, hyper


def _train_joint(data: MultiFidelityData, kind: str, cfg: TrainConfig) -> TrainedSurrogate:
    gradients = kind in GRADIENT_KINDS
    if not gradients:
        data = data.without_grads()
    box = length_box(data.low.X, cfg)
    rlo, rhi = cfg.rho_bounds
    vlo, vhi = cfg.log10_variance_ratio_bounds
    full = box + box + SearchBox((rlo, 10.0**vlo), (rhi, 10.0**vhi), (LINEAR, LOG10))

    def objective(p):
        return joint_lml(p, data, gradients, cfg.alpha)[0]

    res = maximize(objective, full, cfg.ga, cfg.workers)
    lml, hyper = joint_lml(res.best_params, data, gradients, cfg.alpha)
    return build_surrogate(kind, hyper, data.low, data.high, info={"trace": res.trace, "lml_joint": lml})


def train_cokriging(data: MultiFidelityData, cfg: TrainConfig = TrainConfig()) -> TrainedSurrogate:
    """Two-fidelity Cokriging on values (gradients ignored)."""
    _check_multi(data, gradients=False)
    data = data.without_grads()
    if cfg.joint:
        return _train_joint(data, COKRIGING, cfg)
    return _train_two_step(data, COKRIGING, cfg)


def train_gecokriging(data: MultiFidelityData, cfg: TrainConfig = TrainConfig()) -> TrainedSurrogate:
    """Gradient-enhanced Cokriging: values and gradients at both levels."""
    _check_multi(data, gradients=True)
    if cfg.joint:
        return _train_joint(data, GECOKRIGING, cfg)
    return _train_two_step(data, GECOKRIGING, cfg)


def train_cokriging_gradient_baseline(
    data: MultiFidelityData, component: int, cfg: TrainConfig = TrainConfig()
) -> TrainedSurrogate:
    """Value-only Cokriging fitted to gradient component ``component``.

    Its ``mean``/``variance`` predictions are for that gradient component.
    """
    if not data.has_grads:
        raise MissingGradients("the gradient baseline needs gradients at both fidelity levels")
    if not 0 <= component < data.dim:
        raise ValueError(f"component must lie in [0, {data.dim}), got {component}")
    s = train_cokriging(data.gradient_component(component), cfg)
    return replace(s, component=component)


def train(kind: str, data, cfg: TrainConfig = TrainConfig()) -> TrainedSurrogate:
    """Dispatch on model kind; single-fidelity kinds use ``data.high`` when
    handed a ``MultiFidelityData``."""
    _check_kind(kind)
    if kind in MULTI_FIDELITY_KINDS:
        if not isinstance(data, MultiFidelityData):
            raise TypeError(f"{kind} needs MultiFidelityData")
        return train_cokriging(data, cfg) if kind == COKRIGING else train_gecokriging(data, cfg)
    single = data.high if isinstance(data, MultiFidelityData) else data
    return train_kriging(single, cfg) if kind == KRIGING else train_gekriging(single, cfg)
