"""Optimization on the SPD manifold and on parameter orthants.

``rcg_minimize`` is Riemannian conjugate gradient under the affine-invariant
metric with exponential-map retraction, parallel transport and
Fletcher-Reeves coefficients. ``spg_minimize`` is a monotone spectral
projected gradient method for vectors constrained to an orthant.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .divergence import EPS_MIN
from .exceptions import LineSearchWarning
from .linalg import congruence, expm, from_eig, invm, invsqrtm, sqrtm, sym, sym_eig


def riemannian_grad(B, euc_grad):
    """``B sym(euc_grad) B``."""
    return sym(B @ sym(euc_grad) @ B)


def inner(B, xi, eta):
    """Affine-invariant inner product ``trace(B^{-1} xi B^{-1} eta)`` at ``B``."""
    Bi = invm(B)
    return float(np.sum((Bi @ xi) * (eta @ Bi)))


def retract(B, xi):
    """Exponential-map retraction ``B^{1/2} Exp(B^{-1/2} xi B^{-1/2}) B^{1/2}``."""
    w, Q = sym_eig(B)
    S = from_eig(np.sqrt(w), Q)
    Si = from_eig(1.0 / np.sqrt(w), Q)
    return congruence(S, expm(congruence(Si, sym(xi))))


def transporter(X, Y):
    """``Z = (Y X^{-1})^{1/2}`` evaluated as ``Y^{1/2} (Y^{1/2} X^{-1} Y^{1/2})^{1/2} Y^{-1/2}``."""
    Ys = sqrtm(Y)
    Yis = invsqrtm(Y)
    mid = sqrtm(congruence(Ys, invm(X)))
    return Ys @ mid @ Yis


def parallel_transport(P, X, Y):
    """Transport tangent vector ``P`` from ``T_X`` to ``T_Y``: ``Z P Z^T``."""
    Z = transporter(X, Y)
    return sym(Z @ P @ Z.T)


@dataclass
class LineSearchOptions:
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    max_evals: int = 30


@dataclass
class RcgOptions:
    max_iters: int = 300
    rel_obj_tol: float = 1e-6
    grad_tol: float = 1e-12
    line_search: LineSearchOptions = field(default_factory=LineSearchOptions)
    restart_every: int = 0  # 0 means d(d+1)/2

    def __post_init__(self):
        ls = self.line_search
        if not 0 < ls.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if self.rel_obj_tol <= 0:
            raise ValueError("rel_obj_tol must be positive")


class RcgResult(NamedTuple):
    x: np.ndarray
    trace: list
    n_iters: int
    status: str


def rcg_minimize(obj, euc_grad, init, opts=None):
    """Riemannian conjugate gradient on the SPD manifold.

    Parameters
    ----------
    obj : callable
        SPD matrix -> float.
    euc_grad : callable
        SPD matrix -> Euclidean gradient (symmetric matrix).
    init : ndarray, shape (d, d)
    opts : RcgOptions, optional

    Returns
    -------
    RcgResult
        ``trace`` holds the objective at the start and after every accepted
        step; it is non-increasing. ``status`` is one of ``"converged"``,
        ``"stationary"``, ``"max_iters"`` or ``"line_search_failure"``.
    """
    opts = opts or RcgOptions()
    ls = opts.line_search
    B = sym(np.asarray(init, dtype=float))
    d = B.shape[0]
    restart = opts.restart_every or d * (d + 1) // 2
    f = float(obj(B))
    trace = [f]
    grad = riemannian_grad(B, euc_grad(B))
    gnorm2 = inner(B, grad, grad)
    P = -grad
    step0 = 1.0
    status = "max_iters"
    it = 0
    for it in range(1, opts.max_iters + 1):
        if not np.isfinite(gnorm2) or gnorm2 <= opts.grad_tol**2:
            status = "stationary"
            it -= 1
            break
        slope = inner(B, grad, P)
        if not slope < 0:
            P = -grad
            slope = -gnorm2
        t = step0
        accepted = False
        for _ in range(ls.max_evals):
            B_new = retract(B, t * P)
            f_new = float(obj(B_new))
            if np.isfinite(f_new) and f_new <= f + ls.armijo_c1 * t * slope:
                accepted = True
                break
            t *= ls.backtrack
        if not accepted or f_new > f:
            status = "line_search_failure"
            warnings.warn(
                "RCG line search found no decrease; returning best iterate",
                LineSearchWarning,
                stacklevel=2,
            )
            it -= 1
            break
        step0 = min(2.0 * t, 1e8)
        grad_new = riemannian_grad(B_new, euc_grad(B_new))
        gnorm2_new = inner(B_new, grad_new, grad_new)
        eta = gnorm2_new / gnorm2 if gnorm2 > 0 else 0.0
        if it % restart == 0 or not np.isfinite(eta) or eta < 0:
            eta = 0.0
        P = -grad_new + eta * parallel_transport(P, B, B_new)
        rel = abs(f - f_new) / max(abs(f), np.finfo(float).tiny)
        B, f, grad, gnorm2 = B_new, f_new, grad_new, gnorm2_new
        trace.append(f)
        if rel < opts.rel_obj_tol:
            status = "converged"
            break
    return RcgResult(B, trace, it, status)


@dataclass
class SpgOptions:
    max_iters: int = 100
    bb_min: float = 1e-8
    bb_max: float = 1e8
    orthant: str = "positive"
    eps_min: float = EPS_MIN
    tol: float = 1e-10
    armijo_c1: float = 1e-4
    max_evals: int = 30

    def __post_init__(self):
        if not 0 < self.bb_min < self.bb_max:
            raise ValueError("BB step bounds must be positive and ordered")
        if self.orthant not in ("positive", "negative"):
            raise ValueError(f"unknown orthant {self.orthant!r}")


class SpgResult(NamedTuple):
    x: np.ndarray
    fun: float
    n_iters: int
    trace: list


def project_orthant(x, orthant="positive", eps_min=EPS_MIN):
    x = np.asarray(x, dtype=float)
    if orthant == "positive":
        return np.maximum(x, eps_min)
    return np.minimum(x, -eps_min)


def spg_minimize(obj, grad, init, opts=None):
    """Monotone spectral projected gradient on an orthant.

    Steps use the Barzilai-Borwein length ``s^T y / y^T y`` clamped to
    ``[bb_min, bb_max]``; the projected direction is backtracked until the
    Armijo condition holds, so the objective never increases.
    """
    opts = opts or SpgOptions()
    proj = lambda v: project_orthant(v, opts.orthant, opts.eps_min)  # noqa: E731
    x = proj(init)
    f = float(obj(x))
    g = np.asarray(grad(x), dtype=float)
    trace = [f]
    pg = proj(x - g) - x
    step = 1.0 / max(np.abs(pg).max(), 1.0) if pg.size else 1.0
    it = 0
    for it in range(1, opts.max_iters + 1):
        pg = proj(x - g) - x
        if pg.size == 0 or np.abs(pg).max() <= opts.tol:
            it -= 1
            break
        dvec = proj(x - step * g) - x
        gtd = float(g @ dvec)
        t = 1.0
        accepted = False
        for _ in range(opts.max_evals):
            x_new = proj(x + t * dvec)
            f_new = float(obj(x_new))
            if np.isfinite(f_new) and f_new <= f + opts.armijo_c1 * t * gtd:
                accepted = True
                break
            t *= 0.5
        if not accepted or f_new > f:
            it -= 1
            break
        g_new = np.asarray(grad(x_new), dtype=float)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        yy = float(y @ y)
        if sy > 0 and yy > 0:
            step = min(max(sy / yy, opts.bb_min), opts.bb_max)
        else:
            step = opts.bb_max
        x, f, g = x_new, f_new, g_new
        trace.append(f)
    return SpgResult(x, f, it, trace)
