"""Synthetic SPD data, covariance descriptors and dataset containers."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import ortho_group

from .exceptions import DomainError, NotPositiveDefinite
from .linalg import PD_FLOOR, check_spd, from_eig, invsqrtm, sym, sym_eig


@dataclass
class LabeledSpdDataset:
    """SPD samples with integer labels and cached inverse square roots.

    ``labels`` keeps the caller's label values; ``y`` holds their positions
    in ``classes`` and is what the learning code uses.
    """

    samples: np.ndarray
    labels: Optional[np.ndarray] = None
    _isqrt: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.samples = check_spd(self.samples, name="samples")
        if self.samples.ndim != 3:
            raise DomainError("samples must have shape (N, d, d)")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if self.labels.shape != (len(self.samples),):
                raise DomainError("labels must have shape (N,)")
            self.classes, self.y = np.unique(self.labels, return_inverse=True)

    def __len__(self):
        return len(self.samples)

    @property
    def dim(self):
        return self.samples.shape[-1]

    @property
    def n_classes(self):
        return len(self.classes)

    @property
    def isqrt(self):
        if self._isqrt is None:
            self._isqrt = invsqrtm(self.samples)
        return self._isqrt

    def onehot(self):
        H = np.zeros((self.n_classes, len(self)))
        H[self.y, np.arange(len(self))] = 1.0
        return H

    def subset(self, idx):
        idx = np.asarray(idx)
        labels = None if self.labels is None else self.labels[idx]
        out = LabeledSpdDataset.__new__(LabeledSpdDataset)
        out.samples = self.samples[idx]
        out.labels = labels
        out._isqrt = None if self._isqrt is None else self._isqrt[idx]
        if labels is not None:
            out.classes, out.y = np.unique(labels, return_inverse=True)
        return out


@dataclass
class WishartSpec:
    k: int
    d: int
    n_per: int
    dof: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.dof is None:
            self.dof = 2 * self.d
        if min(self.k, self.d, self.n_per) < 1:
            raise DomainError("k, d and n_per must be positive")
        if self.dof < self.d:
            raise DomainError("Wishart degrees of freedom must be >= d")


def random_scale_matrix(d, rng, low=0.5, high=2.0):
    """Random SPD matrix with log-uniform spectrum in ``[low, high]``."""
    Q = ortho_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1))
    w = np.exp(rng.uniform(np.log(low), np.log(high), size=d))
    return from_eig(w, Q)


def wishart_synth(spec):
    """Draw ``k`` Wishart clusters of ``n_per`` samples each.

    Each cluster has a random scale matrix ``Sigma``; samples are
    ``G^T G / dof`` with the rows of ``G`` drawn from ``N(0, Sigma)``.
    Labels run from 1 to ``k``.

    Returns
    -------
    LabeledSpdDataset
    """
    rng = np.random.default_rng(spec.seed)
    d, dof = spec.d, spec.dof
    samples = np.empty((spec.k * spec.n_per, d, d))
    labels = np.repeat(np.arange(1, spec.k + 1), spec.n_per).astype(np.int32)
    for z in range(spec.k):
        sigma = random_scale_matrix(d, rng)
        w, Q = sym_eig(sigma)
        root = from_eig(np.sqrt(w), Q)
        G = rng.standard_normal((spec.n_per, dof, d)) @ root
        samples[z * spec.n_per:(z + 1) * spec.n_per] = sym(
            np.swapaxes(G, -1, -2) @ G / dof
        )
    return LabeledSpdDataset(samples, labels)


def cov_descriptor(features, jitter=0.0):
    """Region covariance of the rows of ``features`` plus ``jitter * I``."""
    F = np.asarray(features, dtype=float)
    if F.ndim != 2 or F.shape[0] < 2:
        raise DomainError("features must be an (m, f) array with m >= 2")
    C = np.atleast_2d(np.cov(F, rowvar=False))
    C = sym(C) + jitter * np.eye(C.shape[0])
    if sym_eig(C).values[0] <= PD_FLOOR:
        raise NotPositiveDefinite("covariance descriptor is degenerate; raise jitter")
    return C


def normalize_dataset(samples, target_spectral_norm=1.0):
    """Scale all matrices by one constant so the largest spectral norm hits the target.

    A single global factor leaves every alpha-beta divergence unchanged.
    Accepts an array ``(N, d, d)`` or a :class:`LabeledSpdDataset`.
    """
    if isinstance(samples, LabeledSpdDataset):
        scaled = normalize_dataset(samples.samples, target_spectral_norm)
        return LabeledSpdDataset(scaled, samples.labels)
    S = np.asarray(samples, dtype=float)
    top = sym_eig(S).values[..., -1].max()
    return S * (target_spectral_norm / top)
