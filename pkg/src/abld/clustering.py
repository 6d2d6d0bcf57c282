"""K-means on SPD matrices with a learned alpha-beta log-det divergence.

``ab_kmeans`` alternates three blocks: Riemannian CG on each centroid,
spectral projected gradient on a single ``(alpha, beta)`` pair (regularized
by ``mu * (alpha^2 + beta^2)``), and nearest-centroid reassignment. The
log-Euclidean and Karcher-mean k-means baselines live here as well.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.metrics.cluster import contingency_matrix
from sklearn.utils.validation import check_is_fitted

from .divergence import (
    AbldParams,
    divergence_from_logeig,
    grad_alpha_from_logeig,
    grad_beta_from_logeig,
    weighted_grad_y,
)
from .iddl import check_spd_stack, le_kmeans_centers, log_eigs, log_eigs_atom
from .linalg import congruence, expm, from_eig, invsqrtm, logm, sqrtm, sym_eig
from .manifold import RcgOptions, SpgOptions, rcg_minimize, spg_minimize

VARIANTS = ("E", "NE")


@dataclass
class Partition:
    """Cluster assignments (0-based), SPD centroids and the shared divergence."""

    assignments: np.ndarray
    centroids: np.ndarray
    params: Optional[AbldParams] = None
    mu: float = 1.0
    variant: str = "E"

    @property
    def k(self):
        return len(self.centroids)


def _pairwise_logeig(samples, centroids):
    return log_eigs(samples, centroids)


def divergence_matrix(samples, centroids, params):
    """``D(X_i || C_z)`` for all samples and centroids, shape ``(N, k)``."""
    x = _pairwise_logeig(samples, centroids)
    return divergence_from_logeig(x, params.alpha, params.beta)


def _assigned_logeig(samples, part):
    x = np.empty(samples.shape[:-1])
    for z in range(part.k):
        idx = np.flatnonzero(part.assignments == z)
        if idx.size:
            x[idx] = log_eigs(samples[idx], part.centroids[z][None])[:, 0]
    return x


def _regularizer(params, mu):
    return mu * (params.alpha**2 + params.beta**2)


def idc_objective(samples, part):
    """Sum of divergences to assigned centroids plus ``mu (alpha^2 + beta^2)``."""
    samples = np.asarray(samples, dtype=float)
    x = _assigned_logeig(samples, part)
    p = part.params
    return float(divergence_from_logeig(x, p.alpha, p.beta).sum() + _regularizer(p, part.mu))


def idc_grad_centroid(samples, part, z, isqrt=None):
    """Euclidean gradient of the objective in centroid ``C_z``."""
    samples = np.asarray(samples, dtype=float)
    members = np.flatnonzero(part.assignments == z)
    isqrt = invsqrtm(samples[members]) if isqrt is None else isqrt[members]
    return weighted_grad_y(isqrt, part.centroids[z], part.params)


def _param_grad(x, a, b, mu, variant):
    ga = grad_alpha_from_logeig(x, a, b).sum() + 2 * mu * a
    gb = grad_beta_from_logeig(x, a, b).sum() + 2 * mu * b
    return np.array([ga + gb]) if variant == "E" else np.array([ga, gb])


def idc_grad_params(samples, part):
    """Gradient in the free parameters: ``[t]`` for variant E, ``[alpha, beta]`` for NE."""
    x = _assigned_logeig(np.asarray(samples, dtype=float), part)
    p = part.params
    return _param_grad(x, p.alpha, p.beta, part.mu, part.variant)


def update_assignments(samples, part):
    """Assign every sample to its nearest centroid; ties go to the lowest index."""
    D = divergence_matrix(np.asarray(samples, dtype=float), part.centroids, part.params)
    return replace(part, assignments=np.argmin(D, axis=1))


def _repair_empty(samples, part):
    counts = np.bincount(part.assignments, minlength=part.k)
    empty = np.flatnonzero(counts == 0)
    if not empty.size:
        return part.centroids.copy()
    x = _assigned_logeig(samples, part)
    own = divergence_from_logeig(x, part.params.alpha, part.params.beta)
    donors = np.argsort(-own, kind="stable")[: empty.size]
    C = part.centroids.copy()
    C[empty] = samples[donors]
    return C


def update_centroids(samples, part, rcg_opts=None, isqrt=None):
    """Improve each non-empty centroid by a bounded RCG run.

    Empty clusters take the sample farthest from its own centroid.
    """
    samples = np.asarray(samples, dtype=float)
    rcg_opts = rcg_opts or RcgOptions(max_iters=10, rel_obj_tol=1e-10)
    isqrt = invsqrtm(samples) if isqrt is None else isqrt
    p = part.params
    C = _repair_empty(samples, part)
    for z in range(part.k):
        members = np.flatnonzero(part.assignments == z)
        if not members.size:
            continue
        Xis = isqrt[members]

        def obj(Cz, Xis=Xis):
            return float(divergence_from_logeig(log_eigs_atom(Xis, Cz), p.alpha, p.beta).sum())

        def grad(Cz, Xis=Xis):
            return weighted_grad_y(Xis, Cz, p)

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = rcg_minimize(obj, grad, C[z], rcg_opts)
        if res.trace[-1] <= res.trace[0]:
            C[z] = res.x
    return replace(part, centroids=C)


def _expand(free, variant):
    return (free[0], free[0]) if variant == "E" else (free[0], free[1])


def update_divergence_params(samples, part, spg_opts=None):
    """SPG on the shared ``(alpha, beta)`` (one tied scalar for variant ``E``)."""
    samples = np.asarray(samples, dtype=float)
    p = part.params
    if p.orthant == "origin":
        return part
    spg_opts = spg_opts or SpgOptions(max_iters=20, orthant=p.orthant)
    x = _assigned_logeig(samples, part)
    mu = part.mu

    def obj(free):
        a, b = _expand(free, part.variant)
        return float(divergence_from_logeig(x, a, b).sum() + mu * (a * a + b * b))

    def grad(free):
        a, b = _expand(free, part.variant)
        return _param_grad(x, a, b, mu, part.variant)

    init = np.array([p.alpha]) if part.variant == "E" else np.array([p.alpha, p.beta])
    res = spg_minimize(obj, grad, init, spg_opts)
    if res.fun > obj(init):
        return part
    a, b = _expand(res.x, part.variant)
    return replace(part, params=AbldParams(a, b))


@dataclass
class IdcOptions:
    mu: float = 1.0
    max_outer: int = 100
    centroid_iters: int = 10
    param_iters: int = 20
    stability: float = 0.999
    orthant: str = "positive"


@dataclass
class IdcReport:
    objective_trace: list = field(default_factory=list)
    unchanged_fraction: list = field(default_factory=list)
    n_outer: int = 0
    termination: str = ""

    def to_dict(self):
        return {
            "objective_trace": self.objective_trace,
            "unchanged_fraction": self.unchanged_fraction,
            "n_outer": self.n_outer,
            "termination": self.termination,
        }


def ab_kmeans(samples, k, variant="E", seed=0, opts=None):
    """Joint clustering and divergence learning.

    Centroids and the initial partition come from log-Euclidean k-means,
    the divergence starts at ``(1, 1)``. Iterates centroid, parameter and
    assignment blocks until at least ``opts.stability`` of the assignments
    are unchanged between successive assignment steps.

    Returns
    -------
    part : Partition
    report : IdcReport
    """
    opts = opts or IdcOptions()
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if opts.mu == 0:
        warnings.warn("mu = 0 leaves (alpha, beta) unregularized", RuntimeWarning, stacklevel=2)
    samples = check_spd_stack(samples)
    if k > len(samples):
        raise ValueError(f"k={k} exceeds the number of samples {len(samples)}")
    sign = 1.0 if opts.orthant == "positive" else -1.0
    init = le_kmeans(samples, k, seed)
    part = Partition(init.assignments, init.centroids, AbldParams(sign, sign), opts.mu, variant)
    isqrt = invsqrtm(samples)
    rcg_opts = RcgOptions(max_iters=opts.centroid_iters, rel_obj_tol=1e-10)
    spg_opts = SpgOptions(max_iters=opts.param_iters, orthant=opts.orthant)
    report = IdcReport()

    def log_block(outer, block):
        report.objective_trace.append(
            {"outer": outer, "block": block, "value": idc_objective(samples, part)}
        )

    log_block(0, "init")
    report.termination = "max_outer"
    for outer in range(1, opts.max_outer + 1):
        part = update_centroids(samples, part, rcg_opts, isqrt)
        log_block(outer, "centroids")
        part = update_divergence_params(samples, part, spg_opts)
        log_block(outer, "params")
        before = part.assignments
        part = update_assignments(samples, part)
        log_block(outer, "assignments")
        same = float(np.mean(before == part.assignments))
        report.unchanged_fraction.append(same)
        report.n_outer = outer
        if same >= opts.stability:
            report.termination = "stable"
            break
    return part, report


def le_kmeans(samples, k, seed=0):
    """Log-Euclidean k-means baseline."""
    samples = np.asarray(samples, dtype=float)
    centers, labels = le_kmeans_centers(samples, k, seed)
    return Partition(np.asarray(labels), centers, None, 0.0)


def karcher_mean(samples, init=None, tol=1e-10, max_iter=200):
    """Affine-invariant (Karcher) mean by Riemannian gradient descent."""
    samples = np.asarray(samples, dtype=float)
    C = expm(logm(samples).mean(axis=0)) if init is None else np.asarray(init, dtype=float)
    for _ in range(max_iter):
        w, Q = sym_eig(C)
        S = from_eig(np.sqrt(w), Q)
        Si = from_eig(1.0 / np.sqrt(w), Q)
        T = logm(congruence(Si, samples)).mean(axis=0)
        C = congruence(S, expm(T))
        if np.linalg.norm(T) < tol:
            break
    return C


def karcher_kmeans(samples, k, seed=0, max_iter=100):
    """Lloyd iterations with AIRM assignments and Karcher-mean centroids."""
    samples = np.asarray(samples, dtype=float)
    part = le_kmeans(samples, k, seed)
    origin = AbldParams.origin()
    C = part.centroids.copy()
    labels = part.assignments
    for _ in range(max_iter):
        for z in range(k):
            members = samples[labels == z]
            if len(members):
                C[z] = karcher_mean(members, init=C[z])
        new = np.argmin(divergence_matrix(samples, C, origin), axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
    return Partition(labels, C, origin, 0.0)


def geodesic_midpoint(X, Y):
    """``X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{1/2}``."""
    S = sqrtm(X)
    Si = invsqrtm(X)
    return congruence(S, sqrtm(congruence(Si, Y)))


def f1_score(assignments, true_labels):
    """Pairwise F1: precision and recall of co-clustered sample pairs."""
    assignments = np.asarray(assignments)
    true_labels = np.asarray(true_labels)
    if assignments.shape != true_labels.shape:
        raise ValueError("assignments and labels must have equal length")
    M = contingency_matrix(true_labels, assignments).astype(float)
    pairs = lambda n: n * (n - 1) / 2.0  # noqa: E731
    tp = pairs(M).sum()
    pred_pos = pairs(M.sum(axis=0)).sum()
    true_pos = pairs(M.sum(axis=1)).sum()
    if pred_pos == 0 or true_pos == 0 or tp == 0:
        return 0.0
    precision = tp / pred_pos
    recall = tp / true_pos
    return float(2 * precision * recall / (precision + recall))


class ABKMeans(ClusterMixin, BaseEstimator):
    """K-means with a jointly learned alpha-beta log-det divergence.

    Parameters
    ----------
    n_clusters : int
    variant : {"E", "NE"}
        ``E`` ties ``alpha == beta``; ``NE`` learns them separately.
    mu : float
        Weight of the ``alpha^2 + beta^2`` regularizer.
    max_iter : int
        Outer iteration cap.
    centroid_iters, param_iters : int
        Inner budgets for the centroid and parameter blocks.
    orthant : {"positive", "negative"}
    random_state : int, optional
    """

    def __init__(
        self,
        n_clusters=8,
        variant="E",
        mu=1.0,
        max_iter=100,
        centroid_iters=10,
        param_iters=20,
        orthant="positive",
        random_state=None,
    ):
        self.n_clusters = n_clusters
        self.variant = variant
        self.mu = mu
        self.max_iter = max_iter
        self.centroid_iters = centroid_iters
        self.param_iters = param_iters
        self.orthant = orthant
        self.random_state = random_state

    def fit(self, X, y=None):
        opts = IdcOptions(
            mu=self.mu,
            max_outer=self.max_iter,
            centroid_iters=self.centroid_iters,
            param_iters=self.param_iters,
            orthant=self.orthant,
        )
        seed = 0 if self.random_state is None else self.random_state
        self.partition_, self.report_ = ab_kmeans(X, self.n_clusters, self.variant, seed, opts)
        self.labels_ = self.partition_.assignments
        self.cluster_centers_ = self.partition_.centroids
        self.alpha_ = self.partition_.params.alpha
        self.beta_ = self.partition_.params.beta
        return self

    def predict(self, X):
        check_is_fitted(self, "partition_")
        X = check_spd_stack(X)
        return np.argmin(divergence_matrix(X, self.cluster_centers_, self.partition_.params), axis=1)


class LogEuclideanKMeans(ClusterMixin, BaseEstimator):
    def __init__(self, n_clusters=8, random_state=None):
        self.n_clusters = n_clusters
        self.random_state = random_state

    def fit(self, X, y=None):
        part = le_kmeans(check_spd_stack(X), self.n_clusters, self.random_state or 0)
        self.labels_ = part.assignments
        self.cluster_centers_ = part.centroids
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        L = logm(check_spd_stack(X))
        Lc = logm(self.cluster_centers_)
        D = np.sum((L[:, None] - Lc[None]) ** 2, axis=(-2, -1))
        return np.argmin(D, axis=1)


class KarcherKMeans(ClusterMixin, BaseEstimator):
    def __init__(self, n_clusters=8, max_iter=100, random_state=None):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        part = karcher_kmeans(
            check_spd_stack(X), self.n_clusters, self.random_state or 0, self.max_iter
        )
        self.labels_ = part.assignments
        self.cluster_centers_ = part.centroids
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        D = divergence_matrix(check_spd_stack(X), self.cluster_centers_, AbldParams.origin())
        return np.argmin(D, axis=1)
