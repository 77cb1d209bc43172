"""Covariance assembly for value-only and gradient-augmented GP models.

Observation ordering is fixed for every model::

    [values_low, values_high, grads_low, grads_high]

with gradient blocks location-major (point 0 dims 0..d-1, point 1, ...).
Single-fidelity models use only the "low" slot and are stored in
correlation form (unit variance); two-fidelity models are stored in
covariance form.

The auto-regressive link ``Y_H = rho * Y_L + Y_d`` gives, for any pair of
linear observations (values or partial derivatives),

    Cov(low, low)   = k_L
    Cov(low, high)  = rho * k_L
    Cov(high, high) = rho**2 * k_L + k_d

applied to the kernel and its derivatives alike.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.linalg.lapack import dpotrf

from .errors import DimensionMismatch, NotPositiveDefinite
from .kernel import Kernel, kernel_grad_matrix, kernel_hess_matrix, kernel_matrix

LOW = "low"
HIGH = "high"
CORRELATION = "correlation"
COVARIANCE = "covariance"

ALPHA_MAX = 1e-6
# escalation starts here when the caller asks for zero jitter
_ALPHA_START = 1e-14


@dataclass(frozen=True)
class BlockLayout:
    n_low: int
    n_high: int
    dim: int
    gradients: bool
    form: str

    @property
    def per_point(self) -> int:
        return 1 + self.dim if self.gradients else 1

    @property
    def size(self) -> int:
        return (self.n_low + self.n_high) * self.per_point

    def indices(self, fidelity: str) -> np.ndarray:
        """Positions of one fidelity's ``[values; gradients]`` in the global vector."""
        nl, nh, d = self.n_low, self.n_high, self.dim
        if fidelity == LOW:
            vals = np.arange(nl)
            grads = nl + nh + np.arange(nl * d)
        elif fidelity == HIGH:
            vals = nl + np.arange(nh)
            grads = nl + nh + nl * d + np.arange(nh * d)
        else:
            raise ValueError(f"unknown fidelity {fidelity!r}")
        return np.concatenate([vals, grads]) if self.gradients else vals


@dataclass(frozen=True)
class CovMatrix:
    entries: np.ndarray
    layout: BlockLayout

    def __post_init__(self):
        if self.entries.shape != (self.layout.size, self.layout.size):
            raise ValueError(
                f"matrix shape {self.entries.shape} does not match layout size {self.layout.size}"
            )
        self.entries.setflags(write=False)

    @property
    def size(self) -> int:
        return self.layout.size


@dataclass(frozen=True)
class Factorization:
    """Lower Cholesky factor of ``C + jitter_used * scale * I``.

    ``jitter_used`` is relative to ``scale``, the typical value variance of
    the matrix (1 for correlation-form and raw matrices).
    """

    lower: np.ndarray
    jitter_used: float
    logdet: float
    scale: float = 1.0

    @property
    def absolute_jitter(self) -> float:
        return self.jitter_used * self.scale

    @property
    def size(self) -> int:
        return self.lower.shape[0]


def _points(X, dim=None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if dim in (None, 1) else X.reshape(-1, dim)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a (n, d) point array, got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise DimensionMismatch(f"points have dimension {X.shape[1]}, expected {dim}")
    return X


def _pair_block(kern: Kernel, A, B, grads_a: bool, grads_b: bool) -> np.ndarray:
    """Covariance between ``[Y(A); dY(A)]`` and ``[Y(B); dY(B)]`` for one kernel."""
    K = kernel_matrix(kern, A, B)
    if not (grads_a or grads_b):
        return K
    na, nb, d = A.shape[0], B.shape[0], kern.dim
    D = kernel_grad_matrix(kern, A, B, K)
    top = [K]
    if grads_b:
        # Cov(Y(a), d_j Y(b)) = dk/db_j = -dk/da_j
        top.append(-D.reshape(na, nb * d))
    rows = [top]
    if grads_a:
        bottom = [D.transpose(0, 2, 1).reshape(na * d, nb)]
        if grads_b:
            H = kernel_hess_matrix(kern, A, B, K)
            bottom.append(H.transpose(0, 2, 1, 3).reshape(na * d, nb * d))
        rows.append(bottom)
    return np.block(rows)


def _linked_block(kern_low, kern_disc, rho, f, g, A, B, grads_a, grads_b) -> np.ndarray:
    if f == LOW and g == LOW:
        return _pair_block(kern_low, A, B, grads_a, grads_b)
    if f != g:
        return rho * _pair_block(kern_low, A, B, grads_a, grads_b)
    out = _pair_block(kern_disc, A, B, grads_a, grads_b)
    if kern_low is not None and rho != 0.0:
        out = out + rho**2 * _pair_block(kern_low, A, B, grads_a, grads_b)
    return out


def assemble_linked(kern_low, kern_disc, rho, XL, XH, gradients, form) -> CovMatrix:
    ref = kern_low if kern_low is not None else kern_disc
    d = ref.dim
    XL = _points(XL, d) if XL is not None else np.empty((0, d))
    XH = _points(XH, d) if XH is not None else np.empty((0, d))
    if XL.shape[0] + XH.shape[0] == 0:
        raise ValueError("cannot assemble a covariance matrix without observation locations")
    layout = BlockLayout(XL.shape[0], XH.shape[0], d, gradients, form)
    C = np.empty((layout.size, layout.size))
    sets = [(f, X) for f, X in ((LOW, XL), (HIGH, XH)) if X.shape[0] > 0]
    for i, (f, A) in enumerate(sets):
        ia = layout.indices(f)
        for g, B in sets[i:]:
            ib = layout.indices(g)
            M = _linked_block(kern_low, kern_disc, rho, f, g, A, B, gradients, gradients)
            C[np.ix_(ia, ib)] = M
            C[np.ix_(ib, ia)] = M.T
    C = 0.5 * (C + C.T)
    return CovMatrix(C, layout)


def correlation_matrix(lengths, X, gradients: bool) -> np.ndarray:
    """Unit-variance matrix of one level, ``[values; gradients]`` ordering.

    Same entries as ``assemble_linked`` in correlation form, built without
    the block bookkeeping; the likelihood search calls this in its inner loop.
    """
    X = _points(X)
    ell2 = np.asarray(lengths, dtype=float) ** 2
    n, d = X.shape
    tau = X[:, None, :] - X[None, :, :]
    w = tau / ell2
    K = np.exp(-0.5 * np.sum(tau * w, axis=-1))
    if not gradients:
        return 0.5 * (K + K.T)
    C = np.empty((n * (1 + d), n * (1 + d)))
    D = -w * K[..., None]
    C[:n, :n] = K
    C[:n, n:] = -D.reshape(n, n * d)
    C[n:, :n] = D.transpose(0, 2, 1).reshape(n * d, n)
    H = np.diag(1.0 / ell2)[None, None] - w[..., :, None] * w[..., None, :]
    C[n:, n:] = (H * K[..., None, None]).transpose(0, 2, 1, 3).reshape(n * d, n * d)
    return 0.5 * (C + C.T)


def assemble_kriging(kern: Kernel, X) -> CovMatrix:
    """Correlation matrix Psi of a value-only single-fidelity model (unit diagonal)."""
    if np.asarray(X).size == 0:
        raise ValueError("X must not be empty")
    return assemble_linked(kern.unit(), None, 0.0, X, None, False, CORRELATION)


def assemble_gekriging(kern: Kernel, X) -> CovMatrix:
    """Gradient-augmented correlation matrix ``[[Psi11, Psi12], [Psi21, Psi22]]``."""
    if np.asarray(X).size == 0:
        raise ValueError("X must not be empty")
    return assemble_linked(kern.unit(), None, 0.0, X, None, True, CORRELATION)


def _check_mf(kernL: Kernel, kernD: Kernel, XL, XH):
    if kernL.dim != kernD.dim:
        raise DimensionMismatch("low-fidelity and discrepancy kernels differ in dimension")
    if np.asarray(XL).size == 0 or np.asarray(XH).size == 0:
        raise ValueError("both fidelity levels need at least one location")


def assemble_cokriging(kernL: Kernel, kernD: Kernel, rho: float, XL, XH) -> CovMatrix:
    _check_mf(kernL, kernD, XL, XH)
    return assemble_linked(kernL, kernD, float(rho), XL, XH, False, COVARIANCE)


def assemble_gecokriging(kernL: Kernel, kernD: Kernel, rho: float, XL, XH) -> CovMatrix:
    _check_mf(kernL, kernD, XL, XH)
    return assemble_linked(kernL, kernD, float(rho), XL, XH, True, COVARIANCE)


def cross_covariance(kern_low, kern_disc, rho, XL, XH, gradients, Xstar, target) -> np.ndarray:
    """Covariance between the training observations and ``[Y(x*); dY(x*)]``.

    Returns an ``(n_train, m * (1 + d))`` array: the first ``m`` columns are
    values at the query points, the rest gradients (location-major). Row
    order follows the training layout.
    """
    ref = kern_low if kern_low is not None else kern_disc
    d = ref.dim
    XL = _points(XL, d) if XL is not None else np.empty((0, d))
    XH = _points(XH, d) if XH is not None else np.empty((0, d))
    Xstar = _points(Xstar, d)
    layout = BlockLayout(XL.shape[0], XH.shape[0], d, gradients, COVARIANCE)
    out = np.empty((layout.size, Xstar.shape[0] * (1 + d)))
    for f, A in ((LOW, XL), (HIGH, XH)):
        if A.shape[0] == 0:
            continue
        out[layout.indices(f)] = _linked_block(
            kern_low, kern_disc, rho, f, target, A, Xstar, gradients, True
        )
    return out


def prior_variances(kern_low, kern_disc, rho, target):
    """Prior variance of the target value and of each gradient component."""
    if target == LOW:
        return kern_low.variance, kern_low.prior_grad_variance()
    val = kern_disc.variance
    grad = kern_disc.prior_grad_variance()
    if kern_low is not None and rho != 0.0:
        val = val + rho**2 * kern_low.variance
        grad = grad + rho**2 * kern_low.prior_grad_variance()
    return val, grad


def _jitter_schedule(alpha: float, alpha_max: float):
    if alpha >= alpha_max:
        return [alpha]
    start = alpha if alpha > 0 else _ALPHA_START
    steps = [0.0] if alpha == 0 else []
    k = 0
    while True:
        a = start * 10.0**k
        if a > alpha_max * (1 + 1e-9):
            break
        steps.append(a)
        k += 1
    return steps


def jitter_scale(C: CovMatrix) -> float:
    """Unit in which jitter is measured: 1 in correlation form, otherwise the
    mean prior variance of the value observations."""
    if C.layout.form == CORRELATION:
        return 1.0
    n_vals = C.layout.n_low + C.layout.n_high
    s = float(np.mean(np.diag(C.entries)[:n_vals]))
    return s if np.isfinite(s) and s > 0 else 1.0


def factorize(C, alpha: float = 1e-14, alpha_max: float = ALPHA_MAX) -> Factorization:
    """Cholesky of ``C + alpha s I``, escalating alpha by x10 up to ``alpha_max``.

    ``s`` is ``jitter_scale(C)`` for an assembled ``CovMatrix`` and 1 for a
    plain array, so jitter means the same thing in correlation and
    covariance form.
    """
    scale = jitter_scale(C) if isinstance(C, CovMatrix) else 1.0
    A = C.entries if isinstance(C, CovMatrix) else np.asarray(C, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if not np.all(np.isfinite(A)):
        raise NotPositiveDefinite("matrix has non-finite entries", jitter_tried=alpha)
    n = A.shape[0]
    diag = np.arange(n)
    tried = alpha
    for a in _jitter_schedule(float(alpha), alpha_max):
        M = np.array(A, order="F", copy=True)
        M[diag, diag] += a * scale
        L, info = dpotrf(M, lower=1, clean=1, overwrite_a=1)
        tried = a
        if info == 0:
            dl = np.diag(L)
            if np.all(dl > 0):
                L.setflags(write=False)
                return Factorization(L, a, float(2.0 * np.sum(np.log(dl))), scale)
    raise NotPositiveDefinite(
        f"Cholesky failed for a {n}x{n} matrix even with jitter {tried:.1e}", jitter_tried=tried
    )


def solve(F: Factorization, b) -> np.ndarray:
    """``(C + jitter I)^-1 b`` via two triangular solves."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != F.size:
        raise DimensionMismatch(f"right-hand side has length {b.shape[0]}, factor size is {F.size}")
    return cho_solve((F.lower, True), b, check_finite=False)


def half_solve(F: Factorization, B) -> np.ndarray:
    """``L^-1 B``; column norms squared give quadratic forms ``b^T C^-1 b``."""
    return solve_triangular(F.lower, B, lower=True, check_finite=False)
