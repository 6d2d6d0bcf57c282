r"""Alpha-beta log-det divergence, its special cases and analytic gradients.

For SPD ``X``, ``Y`` with generalized eigenvalues :math:`\lambda_i` of
:math:`XY^{-1}` the divergence is

.. math::
    D^{(\alpha,\beta)}(X \| Y) = \frac{1}{\alpha\beta}\sum_i
    \log\frac{\alpha\lambda_i^{\beta} + \beta\lambda_i^{-\alpha}}{\alpha+\beta}

for same-sign ``(alpha, beta)``. At the origin ``alpha = beta = 0`` the
squared affine-invariant distance :math:`\|\log(X^{-1/2}YX^{-1/2})\|_F^2` is
used instead.

All the kernels below work on log-eigenvalues ``x = log(lambda)`` so they can
be evaluated for a whole stack of pairs at once.
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import expit

from .exceptions import DegenerateLogArgument, DomainError
from .linalg import (
    congruence,
    from_eig,
    gen_eigvals,
    invm,
    invsqrtm,
    logm,
    sqrtm,
    sym,
    sym_eig,
)

EPS_MIN = 1e-4
NEGATIVITY_TOL = 1e-10
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class AbldParams:
    """Divergence parameters restricted to one closed orthant or the origin."""

    alpha: float = 1.0
    beta: float = 1.0
    eps_min: float = EPS_MIN

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise DomainError(f"non-finite divergence parameters ({a}, {b})")
        if a == 0.0 and b == 0.0:
            return
        if a >= self.eps_min and b >= self.eps_min:
            return
        if a <= -self.eps_min and b <= -self.eps_min:
            return
        raise DomainError(
            f"(alpha, beta) = ({a}, {b}) is neither the origin nor inside an "
            f"orthant with |alpha|, |beta| >= {self.eps_min}"
        )

    @property
    def orthant(self):
        if self.alpha == 0.0 and self.beta == 0.0:
            return "origin"
        return "positive" if self.alpha > 0 else "negative"

    @classmethod
    def origin(cls):
        return cls(0.0, 0.0)

    def swapped(self):
        return AbldParams(self.beta, self.alpha, self.eps_min)


def as_params(p):
    if isinstance(p, AbldParams):
        return p
    a, b = p
    return AbldParams(a, b)


# ---------------------------------------------------------------------------
# eigenvalue-level kernels


def _log_ratio(x, a, b):
    """``log((a exp(b x) + b exp(-a x)) / (a + b))`` elementwise.

    ``a`` and ``b`` broadcast against ``x``; both must be nonzero with the
    same sign for the stable branch, otherwise the argument is formed
    directly and checked.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    th = a + b
    same = a * b > 0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        near = np.log1p((a * np.expm1(b * x) + b * np.expm1(-a * x)) / th)
        far = np.logaddexp(np.log(np.abs(a)) + b * x, np.log(np.abs(b)) - a * x)
        far = far - np.log(np.abs(th))
        small = np.maximum(np.abs(a * x), np.abs(b * x)) < 1.0
        out = np.where(small, near, far)
        if not np.all(same):
            direct = (a * np.exp(b * x) + b * np.exp(-a * x)) / th
            if np.any(np.where(same, False, direct <= _LOG_FLOOR)):
                raise DegenerateLogArgument(
                    "log-det argument is not positive for mixed-sign parameters"
                )
            out = np.where(same, out, np.log(np.where(same, 1.0, direct)))
    return out


def _clamp(val):
    val = np.asarray(val, dtype=float)
    if np.any(val < -NEGATIVITY_TOL):
        warnings.warn(
            f"divergence evaluated to {val.min():.3g} < 0; numerical trouble",
            RuntimeWarning,
            stacklevel=3,
        )
    return np.maximum(val, 0.0)


def divergence_from_logeig(x, alpha, beta):
    """Divergence from log generalized eigenvalues ``x`` of shape ``(..., d)``.

    ``alpha`` and ``beta`` broadcast against ``x.shape[:-1]``. Entries where
    both are zero use the origin (squared AIRM) branch.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    origin = (a == 0) & (b == 0)
    sa = np.where(origin, 1.0, a)
    sb = np.where(origin, 1.0, b)
    general = _log_ratio(x, sa[..., None], sb[..., None]).sum(axis=-1) / (sa * sb)
    airm = np.sum(x * x, axis=-1)
    return _clamp(np.where(origin, airm, general))


def grad_alpha_from_logeig(x, alpha, beta):
    """Partial derivative in ``alpha`` from log-eigenvalues (same-sign only)."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(alpha, dtype=float)[..., None]
    b = np.asarray(beta, dtype=float)[..., None]
    if np.any(a * b <= 0):
        raise DomainError("alpha-derivative needs same-sign nonzero parameters")
    th = a + b
    z = th * x + np.log(a / b)
    bracket = expit(z) - a * x * expit(-z) - a / th - _log_ratio(x, a, b)
    return bracket.sum(axis=-1) / (a[..., 0] ** 2 * b[..., 0])


def grad_beta_from_logeig(x, alpha, beta):
    # dual symmetry: swap the arguments (x -> -x) and the parameters
    return grad_alpha_from_logeig(-np.asarray(x, dtype=float), beta, alpha)


def grad_y_weights(delta, alpha, beta):
    """Spectral weights of the Y-gradient.

    With ``delta`` the eigenvalues of ``X^{-1/2} Y X^{-1/2}`` the gradient is
    ``X^{-1/2} U diag(w) U^T X^{-1/2} + c Y^{-1}``; returns ``(w, c)``.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    origin = (a == 0) & (b == 0)
    sa = np.where(origin, 1.0, a)[..., None]
    sb = np.where(origin, 1.0, b)[..., None]
    th = sa + sb
    rho = sa / sb
    with np.errstate(over="ignore"):
        general = -(th / sb**2) / (delta * (delta**th + rho))
    airm = 2.0 * np.log(delta) / delta
    w = np.where(origin[..., None], airm, general)
    c = np.where(origin, 0.0, 1.0 / np.where(origin, 1.0, b))
    return w, c


# ---------------------------------------------------------------------------
# matrix-level API


def _check_pair(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-2:] != Y.shape[-2:] or X.shape[-1] != X.shape[-2]:
        raise DomainError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return X, Y


def log_gen_eigvals(X, Y):
    X, Y = _check_pair(X, Y)
    return np.log(gen_eigvals(X, Y))


def abld(X, Y, params):
    """Alpha-beta log-det divergence ``D(X || Y)``; broadcasts over stacks."""
    p = as_params(params)
    x = log_gen_eigvals(X, Y)
    val = divergence_from_logeig(x, p.alpha, p.beta)
    return float(val) if val.ndim == 0 else val


def airm_sq(X, Y):
    X, Y = _check_pair(X, Y)
    L = logm(congruence(invsqrtm(X), Y))
    return np.sum(L * L, axis=(-2, -1))


def jbld(X, Y):
    X, Y = _check_pair(X, Y)
    _, ld_mid = np.linalg.slogdet(0.5 * (X + Y))
    _, ld_x = np.linalg.slogdet(X)
    _, ld_y = np.linalg.slogdet(Y)
    return 4.0 * (ld_mid - 0.5 * (ld_x + ld_y))


def jeffreys(X, Y):
    X, Y = _check_pair(X, Y)
    d = X.shape[-1]
    t1 = np.trace(np.linalg.solve(Y, X), axis1=-2, axis2=-1)
    t2 = np.trace(np.linalg.solve(X, Y), axis1=-2, axis2=-1)
    return 0.5 * (t1 + t2) - d


def burg(X, Y):
    X, Y = _check_pair(X, Y)
    d = X.shape[-1]
    # trace(X Y^{-1}) = trace(Y^{-1} X)
    tr = np.trace(np.linalg.solve(Y, X), axis1=-2, axis2=-1)
    _, ld_x = np.linalg.slogdet(X)
    _, ld_y = np.linalg.slogdet(Y)
    return tr - (ld_x - ld_y) - d


def log_euclidean_sq(X, Y):
    X, Y = _check_pair(X, Y)
    L = logm(X) - logm(Y)
    return np.sum(L * L, axis=(-2, -1))


_SPECIAL = {
    "airm_sq": airm_sq,
    "jbld": jbld,
    "jeffreys": jeffreys,
    "burg": burg,
    "log_euclidean_sq": log_euclidean_sq,
}


def special_divergence(X, Y, kind):
    """Closed-form divergences: airm_sq, jbld, jeffreys, burg, log_euclidean_sq."""
    try:
        fn = _SPECIAL[kind]
    except KeyError:
        raise DomainError(f"unknown divergence kind {kind!r}") from None
    val = fn(X, Y)
    return float(val) if np.ndim(val) == 0 else val


def _require_smooth(p):
    if p.orthant == "origin":
        raise DomainError("parameter derivatives are undefined at the origin")


def abld_grad_alpha(X, Y, params):
    p = as_params(params)
    _require_smooth(p)
    val = grad_alpha_from_logeig(log_gen_eigvals(X, Y), p.alpha, p.beta)
    return float(val) if val.ndim == 0 else val


def abld_grad_beta(X, Y, params):
    p = as_params(params)
    _require_smooth(p)
    val = grad_beta_from_logeig(log_gen_eigvals(X, Y), p.alpha, p.beta)
    return float(val) if val.ndim == 0 else val


def logdet_term_grad(A, B, p, q):
    """Gradient in ``B`` of ``logdet(p (A B)^q + I)`` for SPD ``A``, ``B``.

    Evaluated as ``p q B^{-1} A^{-1/2} M^q (I + p M^q)^{-1} A^{1/2}`` with
    ``M = A^{1/2} B A^{1/2}``, using that ``M^q`` and ``(I + p M^q)^{-1}``
    share eigenvectors.
    """
    A, B = _check_pair(A, B)
    if p == 0:
        return np.zeros(np.broadcast_shapes(A.shape, B.shape))
    S = sqrtm(A)
    Si = invsqrtm(A)
    w, U = sym_eig(congruence(S, B))
    mq = w**q
    mid = from_eig(mq / (1.0 + p * mq), U)
    G = p * q * np.linalg.solve(B, Si @ mid @ S)
    return sym(G)


def weighted_grad_y(X_isqrt, Y, params, weights=None):
    r"""Weighted sum of Y-gradients :math:`\sum_i w_i \nabla_Y D(X_i \| Y)`.

    Parameters
    ----------
    X_isqrt : ndarray, shape (N, d, d)
        Cached inverse square roots of the first arguments.
    Y : ndarray, shape (d, d)
    params : AbldParams
    weights : ndarray, shape (N,), optional
        Defaults to all ones.
    """
    p = as_params(params)
    X_isqrt = np.asarray(X_isqrt, dtype=float)
    if X_isqrt.ndim == 2:
        X_isqrt = X_isqrt[None]
    n = X_isqrt.shape[0]
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    delta, U = sym_eig(congruence(X_isqrt, Y))
    w, c = grad_y_weights(delta, p.alpha, p.beta)
    # sum_i K_i diag(weights_i * w_i) K_i^T with K_i = X_i^{-1/2} U_i
    K = X_isqrt @ U
    G = np.einsum("nij,nj,nkj->ik", K, weights[:, None] * w, K)
    if c != 0:
        G = G + c * weights.sum() * invm(Y)
    return sym(G)


def abld_grad_y(X, Y, params):
    """Euclidean gradient of ``D(X || Y)`` in ``Y`` (works at the origin too)."""
    X, Y = _check_pair(X, Y)
    if X.ndim == 2 and Y.ndim == 2:
        return weighted_grad_y(invsqrtm(X), Y, params)
    X, Y = np.broadcast_arrays(X, Y)
    flatX = X.reshape(-1, *X.shape[-2:])
    flatY = Y.reshape(-1, *Y.shape[-2:])
    out = np.stack(
        [weighted_grad_y(invsqrtm(x), y, params) for x, y in zip(flatX, flatY)]
    )
    return out.reshape(X.shape)


def abld_grad_y_logdet(X, Y, params):
    """Same gradient as :func:`abld_grad_y`, routed through :func:`logdet_term_grad`.

    Off the origin the divergence equals, as a function of ``Y``,
    ``(1/ab) logdet(I + (a/b)(X Y^{-1})^{a+b}) - (1/b) logdet(X Y^{-1})`` plus
    a constant; the first term is differentiated in ``B = Y^{-1}`` and pulled
    back through ``dB = -Y^{-1} dY Y^{-1}``.
    """
    p = as_params(params)
    X, Y = _check_pair(X, Y)
    if p.orthant == "origin":
        Xis = invsqrtm(X)
        P = congruence(Xis, Y)
        return sym(2.0 * Xis @ logm(P) @ invm(P) @ Xis)
    a, b = p.alpha, p.beta
    Yi = invm(Y)
    Gb = logdet_term_grad(X, Yi, a / b, a + b)
    return sym(-(Yi @ Gb @ Yi) / (a * b) + Yi / b)


class DegeneracyCheck(NamedTuple):
    ok: bool
    index: Optional[int] = None
    bound: Optional[float] = None


def degeneracy_bound(X, Y, alpha, beta):
    """Check generalized eigenvalues against the mixed-sign positivity bound.

    For ``alpha > 0 > beta`` every eigenvalue must exceed
    ``|alpha/beta|^(1/(alpha+beta))``; for ``alpha < 0 < beta`` every
    eigenvalue must stay below ``|beta/alpha|^(1/(alpha+beta))``. Same-sign
    parameters always pass. Returns the first violating (ascending) index.

    The check is conservative. The log-det argument itself stays positive
    exactly when the eigenvalues clear the reciprocal of this bound, and
    the bound is never below 1 in the first case (never above 1 in the
    second), so pairs that pass always have a finite divergence while some
    harmless pairs, ``X == Y`` included, are flagged.
    """
    alpha, beta = float(alpha), float(beta)
    if alpha * beta > 0 or (alpha == 0 and beta == 0):
        return DegeneracyCheck(True)
    lam = gen_eigvals(*_check_pair(X, Y))
    th = alpha + beta
    if th == 0 or alpha == 0 or beta == 0:
        return DegeneracyCheck(False, 0, float("nan"))
    if alpha > 0:
        bound = abs(alpha / beta) ** (1.0 / th)
        bad = np.flatnonzero(lam <= bound)
    else:
        bound = abs(beta / alpha) ** (1.0 / th)
        bad = np.flatnonzero(lam >= bound)
    if bad.size:
        return DegeneracyCheck(False, int(bad[0]), float(bound))
    return DegeneracyCheck(True, None, float(bound))
