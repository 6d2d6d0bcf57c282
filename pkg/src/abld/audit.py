"""Finite-difference audit of every analytic gradient in the package.

Each family draws random instances, evaluates the analytic gradient and
compares it with central differences taken along every coordinate (for
matrices, the symmetric perturbations ``E_ij + E_ji``). The error of a
trial is ``||fd - analytic|| / max(||analytic||, 1e-8)`` over the whole
vector of directional derivatives; a family reports its worst trial.
"""

from dataclasses import dataclass, field

import numpy as np

from .clustering import Partition, idc_grad_centroid, idc_grad_params, idc_objective
from .data import LabeledSpdDataset, random_scale_matrix
from .divergence import (
    AbldParams,
    abld,
    abld_grad_alpha,
    abld_grad_beta,
    abld_grad_y,
    abld_grad_y_logdet,
    logdet_term_grad,
)
from .iddl import (
    Dictionary,
    _augment,
    _margins,
    encode,
    ridge_grad_atom,
    ridge_grad_params,
    ridge_loss,
    ssvm_grad_atom,
    ssvm_grad_params,
    ssvm_grad_w,
    ssvm_loss,
)
from .linalg import congruence, sqrtm, sym_eig

TOLERANCE = 1e-4


def sym_basis(d):
    """Symmetric perturbation directions ``E_ij + E_ji`` (``E_ii`` on the diagonal)."""
    out = []
    for i in range(d):
        for j in range(i, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1.0
            out.append(E)
    return out


def fd_matrix(f, Y, h=1e-6):
    """Central differences of ``f`` at ``Y`` along :func:`sym_basis` directions."""
    scale = h * max(1.0, np.abs(Y).max())
    return np.array(
        [(f(Y + scale * E) - f(Y - scale * E)) / (2 * scale) for E in sym_basis(len(Y))]
    )


def directional(G):
    """Analytic counterpart of :func:`fd_matrix`: ``<G, E>`` per direction."""
    return np.array([np.sum(G * E) for E in sym_basis(len(G))])


def fd_vector(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        s = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = s
        out[i] = (f(x + e) - f(x - e)) / (2 * s)
    return out


def rel_error(fd, an):
    fd, an = np.ravel(fd), np.ravel(an)
    return float(np.linalg.norm(fd - an) / max(np.linalg.norm(an), 1e-8))


@dataclass
class AuditReport:
    errors: dict = field(default_factory=dict)
    trials: int = 0
    tol: float = TOLERANCE

    @property
    def failures(self):
        return sorted(k for k, v in self.errors.items() if not v <= self.tol)

    @property
    def ok(self):
        return not self.failures

    def to_dict(self):
        return {
            "trials": self.trials,
            "tolerance": self.tol,
            "max_rel_error": dict(sorted(self.errors.items())),
            "failures": self.failures,
            "ok": self.ok,
        }


def _spd(rng, d, low=0.5, high=2.0):
    return random_scale_matrix(d, rng, low, high)


def _params(rng, orthant):
    a, b = rng.uniform(0.2, 2.0, size=2)
    return AbldParams(a, b) if orthant == "positive" else AbldParams(-a, -b)


def _pair(rng):
    d = int(rng.integers(2, 6))
    return _spd(rng, d), _spd(rng, d)


def _toy_problem(rng, tying="N", n_atoms=3, d=3, per_class=4, n_classes=3):
    samples = np.stack([_spd(rng, d) for _ in range(per_class * n_classes)])
    labels = np.repeat(np.arange(n_classes), per_class)
    data = LabeledSpdDataset(samples, labels)
    atoms = np.stack([_spd(rng, d) for _ in range(n_atoms)])
    if tying == "N":
        a = rng.uniform(0.3, 1.5, n_atoms)
        b = rng.uniform(0.3, 1.5, n_atoms)
    elif tying == "S":
        a, b = rng.uniform(0.3, 1.5, size=2)
    else:
        a = b = rng.uniform(0.3, 1.5, n_atoms)
    return data, Dictionary(atoms, a, b, tying)


def _ssvm_instance(rng, margin=1.0, attempts=50):
    # resample until no hinge sits within 1e-3 of its kink
    for _ in range(attempts):
        data, D = _toy_problem(rng)
        W = rng.standard_normal((data.n_classes, D.n_atoms + 1))
        M = _margins(_augment(encode(data.samples, D)), data.y, W, margin)
        M[np.arange(len(data)), data.y] = 1.0
        if np.abs(M).min() > 1e-3:
            return data, D, W
    raise RuntimeError("no kink-free instance found")


def _fam_grad_alpha(rng):
    X, Y = _pair(rng)
    p = _params(rng, "positive" if rng.random() < 0.5 else "negative")
    f = lambda t: abld(X, Y, AbldParams(t[0], p.beta))  # noqa: E731
    return fd_vector(f, [p.alpha]), abld_grad_alpha(X, Y, p)


def _fam_grad_beta(rng):
    X, Y = _pair(rng)
    p = _params(rng, "positive" if rng.random() < 0.5 else "negative")
    f = lambda t: abld(X, Y, AbldParams(p.alpha, t[0]))  # noqa: E731
    return fd_vector(f, [p.beta]), abld_grad_beta(X, Y, p)


def _grad_y_family(orthant):
    def run(rng):
        X, Y = _pair(rng)
        p = AbldParams.origin() if orthant == "origin" else _params(rng, orthant)
        return fd_matrix(lambda Z: abld(X, Z, p), Y), directional(abld_grad_y(X, Y, p))

    return run


def _fam_grad_y_logdet_route(rng):
    X, Y = _pair(rng)
    p = _params(rng, "positive")
    return fd_matrix(lambda Z: abld(X, Z, p), Y), directional(abld_grad_y_logdet(X, Y, p))


def _fam_logdet_term(rng):
    A, B = _pair(rng)
    p, q = rng.uniform(0.2, 2.0, size=2)

    def f(Bm):
        w = sym_eig(congruence(sqrtm(A), Bm)).values
        return float(np.sum(np.log(p * w**q + 1.0)))

    return fd_matrix(f, B), directional(logdet_term_grad(A, B, p, q))


def _fam_ridge_atom(rng):
    data, D = _toy_problem(rng)
    W = rng.standard_normal((data.n_classes, D.n_atoms))
    k = int(rng.integers(D.n_atoms))

    def f(Bk):
        E = D.copy()
        E.atoms[k] = Bk
        return ridge_loss(data, E, W)

    return fd_matrix(f, D.atoms[k]), directional(ridge_grad_atom(data, D, W, k))


def _fam_ridge_params(rng):
    data, D = _toy_problem(rng, tying=str(rng.choice(["S", "V", "N"])))
    W = rng.standard_normal((data.n_classes, D.n_atoms))
    f = lambda v: ridge_loss(data, D.with_free_params(v), W)  # noqa: E731
    return fd_vector(f, D.free_params()), ridge_grad_params(data, D, W)


def _fam_ssvm_w(rng):
    data, D, W = _ssvm_instance(rng)
    fd = fd_vector(lambda w: ssvm_loss(data, D, w.reshape(W.shape)), W.ravel())
    return fd, ssvm_grad_w(data, D, W)


def _fam_ssvm_atom(rng):
    data, D, W = _ssvm_instance(rng)
    k = int(rng.integers(D.n_atoms))

    def f(Bk):
        E = D.copy()
        E.atoms[k] = Bk
        return ssvm_loss(data, E, W)

    return fd_matrix(f, D.atoms[k]), directional(ssvm_grad_atom(data, D, W, k))


def _fam_ssvm_params(rng):
    data, D, W = _ssvm_instance(rng)
    f = lambda v: ssvm_loss(data, D.with_free_params(v), W)  # noqa: E731
    return fd_vector(f, D.free_params()), ssvm_grad_params(data, D, W)


def _idc_instance(rng, variant):
    d, k, n = 3, 2, 8
    samples = np.stack([_spd(rng, d) for _ in range(n)])
    centroids = np.stack([_spd(rng, d) for _ in range(k)])
    assign = np.arange(n) % k
    a, b = rng.uniform(0.3, 1.5, size=2)
    if variant == "E":
        b = a
    mu = float(rng.uniform(0.1, 2.0))
    return samples, Partition(assign, centroids, AbldParams(a, b), mu, variant)


def _fam_idc_centroid(rng):
    samples, part = _idc_instance(rng, "NE")
    z = int(rng.integers(part.k))

    def f(C):
        cs = part.centroids.copy()
        cs[z] = C
        return idc_objective(samples, Partition(part.assignments, cs, part.params, part.mu))

    return fd_matrix(f, part.centroids[z]), directional(idc_grad_centroid(samples, part, z))


def _idc_params_family(variant):
    def run(rng):
        samples, part = _idc_instance(rng, variant)

        def f(v):
            a, b = (v[0], v[0]) if variant == "E" else (v[0], v[1])
            q = Partition(part.assignments, part.centroids, AbldParams(a, b), part.mu, variant)
            return idc_objective(samples, q)

        p = part.params
        x0 = [p.alpha] if variant == "E" else [p.alpha, p.beta]
        return fd_vector(f, x0), idc_grad_params(samples, part)

    return run


FAMILIES = {
    "grad_alpha": _fam_grad_alpha,
    "grad_beta": _fam_grad_beta,
    "grad_y_positive": _grad_y_family("positive"),
    "grad_y_negative": _grad_y_family("negative"),
    "grad_y_origin": _grad_y_family("origin"),
    "grad_y_logdet_route": _fam_grad_y_logdet_route,
    "logdet_term": _fam_logdet_term,
    "ridge_atom": _fam_ridge_atom,
    "ridge_params": _fam_ridge_params,
    "ssvm_w": _fam_ssvm_w,
    "ssvm_atom": _fam_ssvm_atom,
    "ssvm_params": _fam_ssvm_params,
    "idc_centroid": _fam_idc_centroid,
    "idc_params_E": _idc_params_family("E"),
    "idc_params_NE": _idc_params_family("NE"),
}


def gradient_audit(seed=0, trials=20, perturb=None, families=None, tol=TOLERANCE):
    """Compare analytic gradients with central finite differences.

    Parameters
    ----------
    seed : int
    trials : int
        Random instances per family; 0 gives an empty, passing report.
    perturb : dict, optional
        ``family -> callable`` applied to the analytic gradient before the
        comparison. Used to check that the audit catches a broken gradient.
    families : iterable of str, optional
        Subset of :data:`FAMILIES`; all by default.
    tol : float

    Returns
    -------
    AuditReport
    """
    perturb = perturb or {}
    names = list(FAMILIES) if families is None else list(families)
    report = AuditReport(trials=trials, tol=tol)
    if trials <= 0:
        return report
    for i, name in enumerate(names):
        rng = np.random.default_rng([seed, i])
        worst = 0.0
        for _ in range(trials):
            fd, an = FAMILIES[name](rng)
            if name in perturb:
                an = perturb[name](np.asarray(an))
            worst = max(worst, rel_error(fd, an))
        report.errors[name] = worst
    return report
