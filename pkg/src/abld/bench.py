"""Timing of the dictionary-learning gradients against matrix size and atom count.

The atom gradient costs a congruence, an eigendecomposition and a rank-d
reconstruction per sample, so its time should grow like ``N d^3`` and
linearly in the number of atoms when every atom is updated.
"""

import time
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .data import LabeledSpdDataset, random_scale_matrix
from .divergence import AbldParams, weighted_grad_y
from .iddl import Dictionary, _grad_params, log_eigs

D_GRID = (8, 16, 32, 64)
N_GRID = (8, 16, 32, 64)
D_SLOPE = (2.0, 3.6)
N_SLOPE = (0.7, 1.3)


@dataclass
class BenchRow:
    kind: str
    d: int
    n_atoms: int
    n_samples: int
    seconds: float


def _problem(rng, d, n_samples, n_atoms):
    samples = np.stack([random_scale_matrix(d, rng) for _ in range(n_samples)])
    atoms = np.stack([random_scale_matrix(d, rng) for _ in range(n_atoms)])
    data = LabeledSpdDataset(samples, np.zeros(n_samples, dtype=int))
    return data, Dictionary(atoms, 1.0, 1.0, "V")


def _best_time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def time_atom_gradients(data, dictionary, coeff):
    """Euclidean gradients of every atom, as done once per BCD sweep."""
    isqrt = data.isqrt
    for k in range(dictionary.n_atoms):
        weighted_grad_y(isqrt, dictionary.atoms[k], AbldParams(1.0, 1.0), coeff[:, k])


def run_bench(seed=0, n_samples=200, d_grid=D_GRID, n_grid=N_GRID, repeats=5, threads=1):
    """Time atom gradients vs ``d`` (one atom) and vs atom count (``d = 16``), plus parameter gradients vs ``d``.

    Returns
    -------
    list of BenchRow
    """
    rng = np.random.default_rng(seed)
    rows = []
    with threadpool_limits(limits=threads):
        for d in d_grid:
            data, D = _problem(rng, d, n_samples, 1)
            coeff = rng.standard_normal((n_samples, 1))
            _ = data.isqrt
            t = _best_time(lambda: time_atom_gradients(data, D, coeff), repeats)
            rows.append(BenchRow("atom_grad_vs_d", d, 1, n_samples, t))
            t = _best_time(
                lambda: _grad_params(data, D, coeff, log_eigs(data.samples, D.atoms)), repeats
            )
            rows.append(BenchRow("param_grad_vs_d", d, 1, n_samples, t))
        data, _ = _problem(rng, 16, n_samples, 1)
        _ = data.isqrt
        for n in n_grid:
            D = Dictionary(np.stack([random_scale_matrix(16, rng) for _ in range(n)]), 1.0, 1.0, "V")
            coeff = rng.standard_normal((n_samples, n))
            t = _best_time(lambda: time_atom_gradients(data, D, coeff), repeats)
            rows.append(BenchRow("atom_grad_vs_n", 16, n, n_samples, t))
    return rows


def loglog_slope(x, t):
    return float(np.polyfit(np.log(x), np.log(t), 1)[0])


def slope_checks(rows):
    """Fitted slopes and whether they fall in the expected windows."""
    vs_d = [r for r in rows if r.kind == "atom_grad_vs_d"]
    vs_n = [r for r in rows if r.kind == "atom_grad_vs_n"]
    sd = loglog_slope([r.d for r in vs_d], [r.seconds for r in vs_d])
    sn = loglog_slope([r.n_atoms for r in vs_n], [r.seconds for r in vs_n])
    return {
        "slope_d": sd,
        "slope_d_ok": D_SLOPE[0] <= sd <= D_SLOPE[1],
        "slope_n": sn,
        "slope_n_ok": N_SLOPE[0] <= sn <= N_SLOPE[1],
    }
