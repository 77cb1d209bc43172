"""Gaussian (squared-exponential) covariance with analytic derivatives.

All matrix routines take point arrays of shape ``(n, d)`` and return

* ``kernel_matrix``      -> ``(n, m)``         k(a, b)
* ``kernel_grad_matrix`` -> ``(n, m, d)``      dk/da_i
* ``kernel_hess_matrix`` -> ``(n, m, d, d)``   d2k/(da_i db_j)

Derivatives are taken with respect to the *first* argument unless stated
otherwise. For a stationary kernel dk/db_i = -dk/da_i.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelParams:
    """Process variance and one correlation length per input dimension."""

    variance: float
    lengths: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "variance", float(self.variance))
        if not self.variance > 0 or not np.isfinite(self.variance):
            raise ValueError(f"variance must be positive and finite, got {self.variance}")
        if len(lengths) == 0:
            raise ValueError("at least one correlation length is required")
        if not all(v > 0 and np.isfinite(v) for v in lengths):
            raise ValueError(f"correlation lengths must be positive, got {lengths}")

    @property
    def dim(self) -> int:
        return len(self.lengths)

    def with_variance(self, variance: float) -> "KernelParams":
        return KernelParams(variance, self.lengths)


@dataclass(frozen=True)
class Kernel:
    params: KernelParams
    family: str = GAUSSIAN

    def __post_init__(self):
        if self.family != GAUSSIAN:
            raise ValueError(f"unsupported kernel family {self.family!r}; only 'gaussian' is implemented")

    @classmethod
    def gaussian(cls, variance, lengths) -> "Kernel":
        return cls(KernelParams(variance, lengths))

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def variance(self) -> float:
        return self.params.variance

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.params.lengths)

    def unit(self) -> "Kernel":
        """Same correlation lengths, unit variance (correlation form)."""
        return Kernel(self.params.with_variance(1.0), self.family)

    def prior_grad_variance(self) -> np.ndarray:
        """Variance of each gradient component, d2k/(dx_i dx'_i) at zero lag."""
        return self.variance / self.lengths**2


def _as_points(kern: Kernel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        # a 1-D array is a batch of scalars for d == 1, a single point otherwise
        X = X.reshape(-1, 1) if kern.dim == 1 else X.reshape(1, -1)
    if X.shape[1] != kern.dim:
        raise DimensionMismatch(f"points have dimension {X.shape[1]}, kernel expects {kern.dim}")
    return X


def _scaled_lags(kern: Kernel, A, B):
    A = _as_points(kern, A)
    B = _as_points(kern, B)
    tau = A[:, None, :] - B[None, :, :]
    return tau, tau / kern.lengths**2


def kernel_matrix(kern: Kernel, A, B) -> np.ndarray:
    tau, _ = _scaled_lags(kern, A, B)
    r2 = np.sum((tau / kern.lengths) ** 2, axis=-1)
    return kern.variance * np.exp(-0.5 * r2)


def kernel_grad_matrix(kern: Kernel, A, B, K=None) -> np.ndarray:
    tau, w = _scaled_lags(kern, A, B)
    if K is None:
        K = kern.variance * np.exp(-0.5 * np.sum(tau * w, axis=-1))
    return -w * K[..., None]


def kernel_hess_matrix(kern: Kernel, A, B, K=None) -> np.ndarray:
    tau, w = _scaled_lags(kern, A, B)
    if K is None:
        K = kern.variance * np.exp(-0.5 * np.sum(tau * w, axis=-1))
    inv_l2 = np.diag(1.0 / kern.lengths**2)
    H = inv_l2[None, None, :, :] - w[..., :, None] * w[..., None, :]
    return H * K[..., None, None]


def _pair(kern: Kernel, x, xp):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    if x.shape != (kern.dim,) or xp.shape != (kern.dim,):
        raise DimensionMismatch(
            f"expected two points of dimension {kern.dim}, got shapes {x.shape} and {xp.shape}"
        )
    return x[None, :], xp[None, :]


def kernel_eval(kern: Kernel, x, xp) -> float:
    a, b = _pair(kern, x, xp)
    return float(kernel_matrix(kern, a, b)[0, 0])


def kernel_grad_x(kern: Kernel, x, xp) -> np.ndarray:
    a, b = _pair(kern, x, xp)
    return kernel_grad_matrix(kern, a, b)[0, 0]


def kernel_grad_xp(kern: Kernel, x, xp) -> np.ndarray:
    return -kernel_grad_x(kern, x, xp)


def kernel_hess_cross(kern: Kernel, x, xp) -> np.ndarray:
    a, b = _pair(kern, x, xp)
    return kernel_hess_matrix(kern, a, b)[0, 0]
