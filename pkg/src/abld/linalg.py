"""Symmetric matrix primitives.

Every function accepts a single ``(d, d)`` matrix or a stack ``(..., d, d)``
and works on the trailing two axes. Matrix functions go through the
symmetric eigendecomposition and the results are re-symmetrized.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, NonConvergence, NotPositiveDefinite

PD_FLOOR = 1e-10


class EigPair(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def sym(A):
    """Return ``(A + A^T) / 2`` over the trailing axes."""
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def is_symmetric(A, rtol=1e-12):
    A = np.asarray(A, dtype=float)
    asym = np.abs(A - np.swapaxes(A, -1, -2)).max(axis=(-2, -1))
    scale = np.maximum(1.0, np.linalg.norm(A, axis=(-2, -1)))
    return bool(np.all(asym <= rtol * scale))


def sym_eig(A):
    """Eigendecomposition of a symmetric matrix (or stack).

    Eigenvalues are returned in ascending order with matching columns of
    ``vectors``.
    """
    A = np.asarray(A, dtype=float)
    if A.shape[-1] != A.shape[-2]:
        raise DomainError(f"expected square matrices, got shape {A.shape}")
    try:
        w, Q = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return EigPair(w, Q)


def from_eig(w, Q):
    """Rebuild ``Q diag(w) Q^T``."""
    return sym((Q * w[..., None, :]) @ np.swapaxes(Q, -1, -2))


_POSITIVE_ONLY = {"log", "sqrt", "inv_sqrt", "pow", "inv"}


def spd_func(A, f, t=None, pd_floor=PD_FLOOR):
    """Apply a scalar function to the spectrum of a symmetric matrix.

    Parameters
    ----------
    A : ndarray, shape (..., d, d)
        Symmetric input; must be SPD for every ``f`` except ``"exp"``.
    f : {"log", "exp", "sqrt", "inv_sqrt", "pow", "inv"}
    t : float, optional
        Exponent for ``f="pow"``.
    """
    w, Q = sym_eig(A)
    if f in _POSITIVE_ONLY and np.any(w[..., 0] <= pd_floor):
        raise DomainError(
            f"matrix function {f!r} needs an SPD argument "
            f"(smallest eigenvalue {w[..., 0].min():.3g})"
        )
    if f == "log":
        fw = np.log(w)
    elif f == "exp":
        fw = np.exp(w)
    elif f == "sqrt":
        fw = np.sqrt(w)
    elif f == "inv_sqrt":
        fw = 1.0 / np.sqrt(w)
    elif f == "inv":
        fw = 1.0 / w
    elif f == "pow":
        if t is None or not np.isfinite(t):
            raise DomainError("pow requires a finite exponent t")
        fw = w**t
    else:
        raise DomainError(f"unknown matrix function {f!r}")
    return from_eig(fw, Q)


def logm(A):
    return spd_func(A, "log")


def expm(A):
    return spd_func(A, "exp")


def sqrtm(A):
    return spd_func(A, "sqrt")


def invsqrtm(A):
    return spd_func(A, "inv_sqrt")


def powm(A, t):
    return spd_func(A, "pow", t)


def invm(A):
    return spd_func(A, "inv")


def congruence(S, A):
    """``S A S^T`` broadcast over stacks, symmetrized."""
    return sym(S @ A @ np.swapaxes(S, -1, -2))


def gen_eigvals(X, Y):
    """Generalized eigenvalues of ``X Y^{-1}``, ascending.

    Computed as the spectrum of the symmetric matrix ``Y^{-1/2} X Y^{-1/2}``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != Y.shape[-1] or X.shape[-2] != Y.shape[-2]:
        raise DomainError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    Yis = invsqrtm(Y)
    return sym_eig(congruence(Yis, X)).values


def validate_or_jitter(A, jitter=None, pd_floor=PD_FLOOR):
    """Symmetrize ``A`` and add ``jitter * I`` if it is not safely PD.

    The default jitter is ``1e-8 * trace(A) / d``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    A = sym(A)
    d = A.shape[0]
    w = sym_eig(A).values
    if w[0] > pd_floor:
        return A
    if jitter is None:
        jitter = 1e-8 * np.trace(A) / d
    A = A + jitter * np.eye(d)
    if sym_eig(A).values[0] <= pd_floor:
        raise NotPositiveDefinite(
            f"matrix is not positive definite after jitter {jitter:.3g}"
        )
    return A


def check_spd(A, pd_floor=PD_FLOOR, name="matrix"):
    """Validate a matrix or stack of SPD matrices and return it symmetrized."""
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DomainError(f"{name} must have shape (..., d, d), got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    if not is_symmetric(A):
        raise NotPositiveDefinite(f"{name} is not symmetric")
    A = sym(A)
    w = sym_eig(A).values
    if np.any(w[..., 0] <= pd_floor):
        raise NotPositiveDefinite(
            f"{name} is not positive definite (min eigenvalue {w[..., 0].min():.3g})"
        )
    return A
