"""Joint divergence, dictionary and classifier learning.

Each SPD sample ``X`` is encoded as the vector of divergences
``v_k = D^{(alpha_k, beta_k)}(X || B_k)`` to a dictionary of SPD atoms, and a
linear classifier ``W`` is trained on the encodings with either a ridge or a
structured hinge loss. Block-coordinate descent alternates Riemannian CG on
each atom, spectral projected gradient on the divergence parameters and a
classifier update.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning
from sklearn.model_selection import train_test_split
from sklearn.utils.validation import check_is_fitted

from .data import LabeledSpdDataset
from .divergence import (
    AbldParams,
    divergence_from_logeig,
    grad_alpha_from_logeig,
    grad_beta_from_logeig,
    weighted_grad_y,
)
from .exceptions import SingularSystem
from .linalg import check_spd, congruence, expm, invsqrtm, logm, sym_eig
from .manifold import RcgOptions, SpgOptions, rcg_minimize, spg_minimize

TYING_MODES = ("S", "V", "N", "A", "B")
LOSSES = ("ridge", "ssvm")
ABLATIONS = ("joint", "fix_atoms", "fix_params")
PARAM_GRID = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)


@dataclass
class Dictionary:
    """SPD atoms ``(n, d, d)`` with per-atom divergence parameters."""

    atoms: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    tying: str = "V"

    def __post_init__(self):
        if self.tying not in TYING_MODES:
            raise ValueError(f"unknown tying mode {self.tying!r}")
        self.atoms = np.asarray(self.atoms, dtype=float)
        n = len(self.atoms)
        self.alpha = np.broadcast_to(np.asarray(self.alpha, dtype=float), (n,)).copy()
        self.beta = np.broadcast_to(np.asarray(self.beta, dtype=float), (n,)).copy()
        if self.tying == "A":
            self.alpha[:] = self.beta[:] = 0.0
        elif self.tying == "B":
            self.alpha[:] = self.beta[:] = 1.0
        elif self.tying == "V" and not np.array_equal(self.alpha, self.beta):
            raise ValueError("tying V requires alpha == beta per atom")
        elif self.tying == "S" and (np.ptp(self.alpha) or np.ptp(self.beta)):
            raise ValueError("tying S requires one shared parameter pair")

    @property
    def n_atoms(self):
        return len(self.atoms)

    @property
    def dim(self):
        return self.atoms.shape[-1]

    def params(self, k):
        return AbldParams(self.alpha[k], self.beta[k])

    def free_params(self):
        """Free divergence parameters under the tying mode, as a flat vector."""
        if self.tying == "S":
            return np.array([self.alpha[0], self.beta[0]])
        if self.tying == "V":
            return self.alpha.copy()
        if self.tying == "N":
            return np.concatenate([self.alpha, self.beta])
        return np.empty(0)

    def expand(self, free):
        """Per-atom ``(alpha, beta)`` from a free-parameter vector."""
        n = self.n_atoms
        if self.tying == "S":
            return np.full(n, free[0]), np.full(n, free[1])
        if self.tying == "V":
            return np.asarray(free, dtype=float), np.asarray(free, dtype=float)
        if self.tying == "N":
            return free[:n], free[n:]
        return self.alpha, self.beta

    def reduce_grad(self, ga, gb):
        """Chain per-atom parameter gradients into the free-parameter space."""
        if self.tying == "S":
            return np.array([ga.sum(), gb.sum()])
        if self.tying == "V":
            return ga + gb
        if self.tying == "N":
            return np.concatenate([ga, gb])
        return np.empty(0)

    def with_free_params(self, free):
        a, b = self.expand(free)
        return replace(self, atoms=self.atoms.copy(), alpha=a, beta=b)

    def copy(self):
        return replace(
            self, atoms=self.atoms.copy(), alpha=self.alpha.copy(), beta=self.beta.copy()
        )


# ---------------------------------------------------------------------------
# encoding


def log_eigs(samples, atoms):
    """Log generalized eigenvalues of every sample against every atom, ``(N, n, d)``."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 2:
        samples = samples[None]
    Bis = invsqrtm(atoms)
    M = congruence(Bis[None], samples[:, None])
    return np.log(np.linalg.eigvalsh(M))


def log_eigs_atom(isqrt, atom):
    """Log generalized eigenvalues of ``X_i B^{-1}`` from cached ``X_i^{-1/2}``."""
    delta = np.linalg.eigvalsh(congruence(isqrt, atom))
    return -np.log(delta)


def encode(X, dictionary, bias=False):
    """Divergence encoding of one sample ``(n,)`` or a stack ``(N, n)``.

    With ``bias=True`` a constant 1 is appended (structured hinge loss).
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 2
    x = log_eigs(X, dictionary.atoms)
    V = divergence_from_logeig(x, dictionary.alpha[None], dictionary.beta[None])
    if bias:
        V = np.hstack([V, np.ones((len(V), 1))])
    return V[0] if single else V


def _augment(V):
    return np.hstack([V, np.ones((len(V), 1))])


# ---------------------------------------------------------------------------
# ridge loss


def _ridge_value(V, H, W, gamma):
    R = H - W @ V.T
    return 0.5 * np.sum(R * R) + gamma * np.sum(W * W)


def _ridge_dV(V, H, W):
    # row i is -(h_i - W v_i)^T W
    return -(H - W @ V.T).T @ W


def ridge_loss(data, dictionary, W, gamma=0.0):
    """``sum_i 0.5 ||h_i - W v_i||^2 + gamma ||W||_F^2`` (penalty counted once)."""
    return _ridge_value(encode(data.samples, dictionary), data.onehot(), W, gamma)


def _solve_ridge(V, H, gamma):
    n = V.shape[1]
    A = V.T @ V + 2.0 * gamma * np.eye(n)
    if np.linalg.cond(A) > 1e14:
        raise SingularSystem("ridge normal equations are numerically singular")
    return np.linalg.solve(A, V.T @ H.T).T


def solve_w_ridge(data, dictionary, gamma=0.0):
    """Exact minimizer ``W = H V (V^T V + 2 gamma I)^{-1}`` of :func:`ridge_loss`.

    ``V`` here stacks encodings as rows.
    """
    return _solve_ridge(encode(data.samples, dictionary), data.onehot(), gamma)


def ridge_grad_w(data, dictionary, W, gamma=0.0):
    V = encode(data.samples, dictionary)
    return -(data.onehot() - W @ V.T) @ V + 2.0 * gamma * W


# ---------------------------------------------------------------------------
# structured hinge loss


def _margins(Va, y, W, margin):
    G = Va @ W.T
    M = G - G[np.arange(len(y)), y][:, None] + margin
    M[np.arange(len(y)), y] = 0.0
    return M


def _ssvm_value(Va, y, W, gamma, margin):
    M = _margins(Va, y, W, margin)
    return np.maximum(M, 0.0).sum() + gamma * np.sum(W * W)


def _ssvm_coeff(Va, y, W, margin):
    # C[i, j] = 1 for active hinges j != y_i, C[i, y_i] = -(number active)
    A = (_margins(Va, y, W, margin) > 0).astype(float)
    A[np.arange(len(y)), y] = 0.0
    C = A.copy()
    C[np.arange(len(y)), y] = -A.sum(axis=1)
    return C


def _ssvm_grad_w(Va, y, W, gamma, margin):
    return _ssvm_coeff(Va, y, W, margin).T @ Va + 2.0 * gamma * W


def _ssvm_dV(Va, y, W, margin):
    # d hinge / d v_i = sum_j 1(active) (w_j - w_{y_i}); bias column dropped
    return (_ssvm_coeff(Va, y, W, margin) @ W)[:, :-1]


def ssvm_loss(data, dictionary, W, gamma=0.0, margin=1.0):
    """Multiclass hinge ``sum_i sum_{l != y_i} max(0, g_l - g_{y_i} + margin)`` plus ``gamma ||W||^2``.

    ``W`` has shape ``(L, n + 1)``; its last column multiplies the constant
    bias feature.
    """
    Va = encode(data.samples, dictionary, bias=True)
    return _ssvm_value(Va, data.y, W, gamma, margin)


def ssvm_grad_w(data, dictionary, W, gamma=0.0, margin=1.0):
    """Subgradient in ``W``; hinges exactly at the kink contribute nothing."""
    Va = encode(data.samples, dictionary, bias=True)
    return _ssvm_grad_w(Va, data.y, W, gamma, margin)


# ---------------------------------------------------------------------------
# chain rule through the encoding


def _loss_dV(loss, V, data, W, margin):
    if loss == "ridge":
        return _ridge_dV(V, data.onehot(), W)
    return _ssvm_dV(_augment(V), data.y, W, margin)


def _grad_atom(data, dictionary, coeff, k):
    return weighted_grad_y(data.isqrt, dictionary.atoms[k], dictionary.params(k), coeff[:, k])


def _grad_params(data, dictionary, coeff, x=None):
    if dictionary.tying in ("A", "B"):
        return np.empty(0)
    if x is None:
        x = log_eigs(data.samples, dictionary.atoms)
    a, b = dictionary.alpha[None], dictionary.beta[None]
    ga = np.sum(coeff * grad_alpha_from_logeig(x, a, b), axis=0)
    gb = np.sum(coeff * grad_beta_from_logeig(x, a, b), axis=0)
    return dictionary.reduce_grad(ga, gb)


def ridge_grad_atom(data, dictionary, W, k):
    """Euclidean gradient of the ridge loss in atom ``B_k``."""
    V = encode(data.samples, dictionary)
    return _grad_atom(data, dictionary, _ridge_dV(V, data.onehot(), W), k)


def ridge_grad_params(data, dictionary, W):
    """Gradient of the ridge loss in the free divergence parameters.

    Layout follows :meth:`Dictionary.free_params`; frozen modes return an
    empty vector.
    """
    V = encode(data.samples, dictionary)
    return _grad_params(data, dictionary, _ridge_dV(V, data.onehot(), W))


def ssvm_grad_atom(data, dictionary, W, k, margin=1.0):
    V = encode(data.samples, dictionary)
    return _grad_atom(data, dictionary, _ssvm_dV(_augment(V), data.y, W, margin), k)


def ssvm_grad_params(data, dictionary, W, margin=1.0):
    V = encode(data.samples, dictionary)
    return _grad_params(data, dictionary, _ssvm_dV(_augment(V), data.y, W, margin))


# ---------------------------------------------------------------------------
# initialization


def le_kmeans_centers(samples, n, seed=0):
    """Log-Euclidean k-means: cluster matrix logs, map centers back with exp.

    Returns ``(centers, labels)``.
    """
    samples = np.asarray(samples, dtype=float)
    N, d, _ = samples.shape
    L = logm(samples).reshape(N, d * d)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        km = KMeans(n_clusters=n, init="k-means++", n_init=1, random_state=seed).fit(L)
    centers = expm(km.cluster_centers_.reshape(n, d, d))
    return centers, km.labels_


def init_dictionary(data, n, tying="V", seed=0):
    """Atoms from log-Euclidean k-means; parameters start at ``(1, 1)``."""
    if n > len(data):
        raise ValueError(f"cannot draw {n} atoms from {len(data)} samples")
    atoms, _ = le_kmeans_centers(data.samples, n, seed)
    return Dictionary(atoms, 1.0, 1.0, tying)


def _grid_points(tying, orthant):
    sign = 1.0 if orthant == "positive" else -1.0
    if tying == "V":
        pts = [(g, g) for g in PARAM_GRID]
    else:
        pts = [(a, b) for a in PARAM_GRID for b in PARAM_GRID]
    return [(sign * a, sign * b) for a, b in pts]


def init_params(data, dictionary, mode="burg", gamma=1e-3, orthant="positive", seed=0):
    """Initial divergence parameters for a fixed dictionary.

    ``mode="burg"`` sets every pair to ``(1, 1)`` (``(-1, -1)`` in the
    negative orthant). ``mode="grid"`` fits the ridge classifier on 80% of the
    data for each grid point and keeps the one with the best accuracy on the
    held-out 20% (first one on ties).

    Returns
    -------
    dictionary : Dictionary
    scores : list of (alpha, beta, accuracy)
    """
    if dictionary.tying in ("A", "B"):
        return dictionary.copy(), []
    sign = 1.0 if orthant == "positive" else -1.0
    if mode == "burg":
        return replace(dictionary.copy(), alpha=sign, beta=sign), []
    if mode != "grid":
        raise ValueError(f"unknown init mode {mode!r}")
    idx = np.arange(len(data))
    counts = np.bincount(data.y)
    stratify = data.y if counts.min() >= 2 and data.n_classes * 2 <= len(data) // 5 else None
    try:
        tr, va = train_test_split(idx, test_size=0.2, random_state=seed, stratify=stratify)
    except ValueError:
        tr = va = idx
    x = log_eigs(data.samples, dictionary.atoms)
    H = data.onehot()
    scores = []
    best, best_acc = None, -1.0
    for a, b in _grid_points(dictionary.tying, orthant):
        V = divergence_from_logeig(x, a, b)
        W = _solve_ridge(V[tr], H[:, tr], max(gamma, 1e-10))
        acc = float(np.mean(np.argmax(V[va] @ W.T, axis=1) == data.y[va]))
        scores.append((a, b, acc))
        if acc > best_acc:
            best, best_acc = (a, b), acc
    return replace(dictionary.copy(), alpha=best[0], beta=best[1]), scores


def param_sweep(train, test, dictionary, alphas=PARAM_GRID, betas=PARAM_GRID, gamma=1e-3):
    """Accuracy surface over shared ``(alpha, beta)`` with the atoms frozen.

    For every grid point all atoms take that pair, the ridge classifier is
    solved in closed form on ``train`` and scored on ``test``.

    Returns
    -------
    list of dict with keys ``alpha``, ``beta``, ``train_loss``, ``test_accuracy``
    """
    x_tr = log_eigs(train.samples, dictionary.atoms)
    x_te = log_eigs(test.samples, dictionary.atoms)
    H = train.onehot()
    y_te = np.searchsorted(train.classes, test.labels)
    rows = []
    for a in alphas:
        for b in betas:
            AbldParams(a, b)  # validates the pair
            V = divergence_from_logeig(x_tr, a, b)
            W = _solve_ridge(V, H, gamma)
            pred = np.argmax(divergence_from_logeig(x_te, a, b) @ W.T, axis=1)
            rows.append({
                "alpha": float(a),
                "beta": float(b),
                "train_loss": float(_ridge_value(V, H, W, gamma)),
                "test_accuracy": float(np.mean(pred == y_te)),
            })
    return rows


# ---------------------------------------------------------------------------
# training


@dataclass
class IddlOptions:
    gamma: float = 1e-3
    margin: float = 1.0
    max_outer: int = 50
    tol: float = 1e-6
    rcg_iters: int = 5
    spg_iters: int = 20
    init: str = "burg"
    orthant: str = "positive"
    ssvm_max_steps: int = 500
    ssvm_tol: float = 1e-6


@dataclass
class TrainReport:
    objective_trace: list = field(default_factory=list)
    alpha_trajectory: list = field(default_factory=list)
    beta_trajectory: list = field(default_factory=list)
    train_accuracy: list = field(default_factory=list)
    termination: str = ""
    n_outer: int = 0

    @property
    def final_objective(self):
        return self.objective_trace[-1]["value"]

    def to_dict(self):
        return {
            "objective_trace": self.objective_trace,
            "alpha_trajectory": [list(map(float, a)) for a in self.alpha_trajectory],
            "beta_trajectory": [list(map(float, b)) for b in self.beta_trajectory],
            "train_accuracy": self.train_accuracy,
            "termination": self.termination,
            "n_outer": self.n_outer,
        }


def _fit_ssvm_w(Va, y, W, gamma, margin, max_steps, tol):
    """Subgradient descent with Armijo backtracking; never increases the loss."""
    f = _ssvm_value(Va, y, W, gamma, margin)
    t = 1.0 / max(np.sum(Va * Va) / len(Va), 1e-12)
    for _ in range(max_steps):
        G = _ssvm_grad_w(Va, y, W, gamma, margin)
        g2 = np.sum(G * G)
        if g2 == 0:
            break
        for _ in range(40):
            W_new = W - t * G
            f_new = _ssvm_value(Va, y, W_new, gamma, margin)
            if f_new <= f - 1e-4 * t * g2:
                break
            t *= 0.5
        else:
            break
        rel = (f - f_new) / max(abs(f), 1e-300)
        W, f = W_new, f_new
        t *= 2.0
        if rel < tol:
            break
    return W


class _AtomObjective:
    """Loss as a function of one atom, sharing eigendecompositions between calls."""

    def __init__(self, data, dictionary, k, V, W, loss, gamma, margin):
        self.data, self.k, self.V, self.W = data, k, V, W
        self.loss, self.gamma, self.margin = loss, gamma, margin
        self.params = dictionary.params(k)
        self._key = None

    def _encode(self, B):
        key = B.tobytes()
        if key != self._key:
            x = log_eigs_atom(self.data.isqrt, B)
            V = self.V.copy()
            V[:, self.k] = divergence_from_logeig(x, self.params.alpha, self.params.beta)
            self._key, self._V = key, V
        return self._V

    def value(self, B):
        return _objective(self.loss, self._encode(B), self.data, self.W, self.gamma, self.margin)

    def grad(self, B):
        V = self._encode(B)
        coeff = _loss_dV(self.loss, V, self.data, self.W, self.margin)
        return weighted_grad_y(self.data.isqrt, B, self.params, coeff[:, self.k])


def _objective(loss, V, data, W, gamma, margin):
    if loss == "ridge":
        return _ridge_value(V, data.onehot(), W, gamma)
    return _ssvm_value(_augment(V), data.y, W, gamma, margin)


def _scores(V, W, loss):
    return (_augment(V) if loss == "ssvm" else V) @ W.T


def _update_w(loss, V, data, W, opts):
    if loss == "ridge":
        return _solve_ridge(V, data.onehot(), opts.gamma)
    return _fit_ssvm_w(
        _augment(V), data.y, W, opts.gamma, opts.margin, opts.ssvm_max_steps, opts.ssvm_tol
    )


def train_iddl(
    data,
    n_atoms=None,
    loss="ridge",
    tying="V",
    opts=None,
    ablation="joint",
    seed=0,
    dictionary=None,
):
    """Block-coordinate descent over atoms, divergence parameters and classifier.

    Parameters
    ----------
    data : LabeledSpdDataset
    n_atoms : int, optional
        Defaults to ``5 * n_classes``.
    loss : {"ridge", "ssvm"}
    tying : {"S", "V", "N", "A", "B"}
    opts : IddlOptions, optional
    ablation : {"joint", "fix_atoms", "fix_params"}
        ``fix_atoms`` skips the atom block, ``fix_params`` the parameter block.
    seed : int
    dictionary : Dictionary, optional
        Starting point; skips initialization when given.

    Returns
    -------
    dictionary : Dictionary
    W : ndarray, shape (L, n) or (L, n + 1)
    report : TrainReport
    """
    opts = opts or IddlOptions()
    if loss not in LOSSES:
        raise ValueError(f"unknown loss {loss!r}")
    if ablation not in ABLATIONS:
        raise ValueError(f"unknown ablation mode {ablation!r}")
    if dictionary is None:
        n_atoms = n_atoms or 5 * data.n_classes
        dictionary = init_dictionary(data, n_atoms, tying, seed)
        dictionary, _ = init_params(data, dictionary, opts.init, opts.gamma, opts.orthant, seed)
    else:
        dictionary = dictionary.copy()
    n = dictionary.n_atoms
    report = TrainReport()

    x = log_eigs(data.samples, dictionary.atoms)
    V = divergence_from_logeig(x, dictionary.alpha[None], dictionary.beta[None])
    W0 = np.zeros((data.n_classes, n + (loss == "ssvm")))
    W = _update_w(loss, V, data, W0, opts)
    obj = _objective(loss, V, data, W, opts.gamma, opts.margin)

    def log_block(outer, block, value):
        report.objective_trace.append({"outer": outer, "block": block, "value": float(value)})

    log_block(0, "init", obj)
    rcg_opts = RcgOptions(max_iters=opts.rcg_iters, rel_obj_tol=1e-10)
    spg_opts = SpgOptions(max_iters=opts.spg_iters, orthant=opts.orthant)
    learn_params = ablation != "fix_params" and dictionary.tying not in ("A", "B")
    report.termination = "max_outer"
    for outer in range(1, opts.max_outer + 1):
        prev = obj
        if ablation != "fix_atoms":
            for k in range(n):
                fk = _AtomObjective(data, dictionary, k, V, W, loss, opts.gamma, opts.margin)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    res = rcg_minimize(fk.value, fk.grad, dictionary.atoms[k], rcg_opts)
                if res.trace[-1] < obj:
                    dictionary.atoms[k] = res.x
                    V = fk._encode(res.x)
                    x[:, k] = log_eigs_atom(data.isqrt, res.x)
                    obj = res.trace[-1]
            log_block(outer, "atoms", obj)
        if learn_params:

            def pobj(free):
                a, b = dictionary.expand(free)
                Vp = divergence_from_logeig(x, a[None], b[None])
                return _objective(loss, Vp, data, W, opts.gamma, opts.margin)

            def pgrad(free):
                d2 = dictionary.with_free_params(free)
                Vp = divergence_from_logeig(x, d2.alpha[None], d2.beta[None])
                coeff = _loss_dV(loss, Vp, data, W, opts.margin)
                return _grad_params(data, d2, coeff, x)

            res = spg_minimize(pobj, pgrad, dictionary.free_params(), spg_opts)
            if res.fun <= obj:
                dictionary = dictionary.with_free_params(res.x)
                V = divergence_from_logeig(x, dictionary.alpha[None], dictionary.beta[None])
                obj = res.fun
            log_block(outer, "params", obj)
        W_new = _update_w(loss, V, data, W, opts)
        obj_new = _objective(loss, V, data, W_new, opts.gamma, opts.margin)
        if obj_new <= obj:
            W, obj = W_new, obj_new
        log_block(outer, "classifier", obj)

        report.alpha_trajectory.append(dictionary.alpha.copy())
        report.beta_trajectory.append(dictionary.beta.copy())
        acc = float(np.mean(np.argmax(_scores(V, W, loss), axis=1) == data.y))
        report.train_accuracy.append(acc)
        report.n_outer = outer
        if abs(prev - obj) <= opts.tol * max(abs(prev), np.finfo(float).tiny):
            report.termination = "converged"
            break
    return dictionary, W, report


def predict(X, dictionary, W, loss="ridge"):
    """Class index (0-based) maximizing the classifier score; ties go to the lower index."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 2
    V = np.atleast_2d(encode(X, dictionary))
    out = np.argmax(_scores(V, W, loss), axis=1)
    return int(out[0]) if single else out


def check_spd_stack(X, name="X"):
    X = check_spd(X, name=name)
    if X.ndim != 3:
        raise ValueError(f"{name} must have shape (n_samples, d, d), got {X.shape}")
    return X


class IDDLClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Classifier on SPD matrices with learned divergences and dictionary.

    Parameters
    ----------
    n_atoms : int, optional
        Dictionary size; ``5 * n_classes`` when omitted.
    loss : {"ridge", "ssvm"}
    tying : {"S", "V", "N", "A", "B"}
        Shared pair, per-atom with alpha == beta, per-atom free, frozen at the
        AIRM origin, or frozen at ``(1, 1)``.
    gamma : float
        Weight of the ``||W||_F^2`` penalty.
    margin : float
        Hinge margin for ``loss="ssvm"``.
    ablation : {"joint", "fix_atoms", "fix_params"}
    init_params : {"burg", "grid"}
    orthant : {"positive", "negative"}
    max_iter, tol : outer BCD budget and relative objective tolerance.
    rcg_iters, spg_iters : inner budgets per block.
    random_state : int, optional
    """

    def __init__(
        self,
        n_atoms=None,
        loss="ridge",
        tying="V",
        gamma=1e-3,
        margin=1.0,
        ablation="joint",
        init_params="burg",
        orthant="positive",
        max_iter=50,
        tol=1e-6,
        rcg_iters=5,
        spg_iters=20,
        random_state=None,
    ):
        self.n_atoms = n_atoms
        self.loss = loss
        self.tying = tying
        self.gamma = gamma
        self.margin = margin
        self.ablation = ablation
        self.init_params = init_params
        self.orthant = orthant
        self.max_iter = max_iter
        self.tol = tol
        self.rcg_iters = rcg_iters
        self.spg_iters = spg_iters
        self.random_state = random_state

    def _options(self):
        return IddlOptions(
            gamma=self.gamma,
            margin=self.margin,
            max_outer=self.max_iter,
            tol=self.tol,
            rcg_iters=self.rcg_iters,
            spg_iters=self.spg_iters,
            init=self.init_params,
            orthant=self.orthant,
        )

    def fit(self, X, y):
        data = LabeledSpdDataset(check_spd_stack(X), np.asarray(y))
        seed = 0 if self.random_state is None else self.random_state
        self.dictionary_, self.coef_, self.report_ = train_iddl(
            data,
            n_atoms=self.n_atoms,
            loss=self.loss,
            tying=self.tying,
            opts=self._options(),
            ablation=self.ablation,
            seed=seed,
        )
        self.classes_ = data.classes
        return self

    def transform(self, X):
        """Divergence encodings ``(n_samples, n_atoms)``."""
        check_is_fitted(self, "dictionary_")
        return encode(check_spd_stack(X), self.dictionary_)

    def decision_function(self, X):
        return _scores(self.transform(X), self.coef_, self.loss)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    def objective(self, X, y):
        """Training loss of the fitted model on ``(X, y)``."""
        check_is_fitted(self, "dictionary_")
        data = LabeledSpdDataset(check_spd_stack(X), np.asarray(y))
        V = encode(data.samples, self.dictionary_)
        return _objective(self.loss, V, data, self.coef_, self.gamma, self.margin)
