import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from abld.clustering import (
    ABKMeans,
    IdcOptions,
    KarcherKMeans,
    LogEuclideanKMeans,
    Partition,
    ab_kmeans,
    divergence_matrix,
    f1_score,
    geodesic_midpoint,
    idc_grad_params,
    idc_objective,
    karcher_kmeans,
    karcher_mean,
    le_kmeans,
    update_assignments,
    update_centroids,
    update_divergence_params,
)
from abld.data import WishartSpec, wishart_synth
from abld.divergence import AbldParams, abld
from abld.manifold import RcgOptions, SpgOptions
from conftest import make_spd


@pytest.fixture
def blobs(rng):
    X = np.stack([make_spd(rng, 3) for _ in range(12)])
    C = np.stack([make_spd(rng, 3) for _ in range(3)])
    part = Partition(np.arange(12) % 3, C, AbldParams(0.7, 0.7), 1.0, "E")
    return X, part


@pytest.fixture(scope="module")
def wishart3():
    return wishart_synth(WishartSpec(k=3, d=4, n_per=15, seed=5))


def _monotone(trace):
    vals = [t["value"] for t in trace]
    return all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# objective


def test_objective_examples(blobs):
    X, part = blobs
    C = X[:3]
    exact = Partition(np.arange(3), C, AbldParams(1, 1), 0.0)
    assert idc_objective(X[:3], exact) == pytest.approx(0.0, abs=1e-12)
    exact.mu = 2.5
    assert idc_objective(X[:3], exact) == pytest.approx(2 * 2.5, abs=1e-12)
    naive = sum(abld(X[i], part.centroids[part.assignments[i]], part.params) for i in range(12))
    naive += part.mu * (0.7**2 * 2)
    assert idc_objective(X, part) == pytest.approx(naive, rel=1e-12)


def test_divergence_matrix_bruteforce(blobs):
    X, part = blobs
    D = divergence_matrix(X, part.centroids, part.params)
    for i in (0, 7):
        for z in range(3):
            assert D[i, z] == pytest.approx(abld(X[i], part.centroids[z], part.params), rel=1e-10)


# ---------------------------------------------------------------------------
# assignment block


def test_assignment_examples(blobs):
    X, part = blobs
    C = part.centroids.copy()
    C[2] = X[4]
    p2 = update_assignments(X, Partition(part.assignments, C, part.params))
    assert p2.assignments[4] == 2
    same = Partition(part.assignments, np.stack([C[0], C[0], C[1]]), part.params)
    out = update_assignments(X, same).assignments
    assert not np.any(out == 1)


def test_assignment_matches_argmin_and_descends(blobs):
    X, part = blobs
    new = update_assignments(X, part)
    D = np.array([[abld(x, c, part.params) for c in part.centroids] for x in X])
    np.testing.assert_array_equal(new.assignments, np.argmin(D, axis=1))
    assert idc_objective(X, new) <= idc_objective(X, part)
    np.testing.assert_array_equal(update_assignments(X, new).assignments, new.assignments)


# ---------------------------------------------------------------------------
# centroid block


def test_centroid_single_member_converges(rng):
    X = make_spd(rng, 3)[None]
    part = Partition(np.array([0]), np.eye(3)[None], AbldParams(0.5, 0.5), 0.0)
    opts = RcgOptions(max_iters=200, rel_obj_tol=1e-14)
    out = update_centroids(X, part, opts)
    assert idc_objective(X, out) <= 1e-8
    np.testing.assert_allclose(out.centroids[0], X[0], atol=1e-3)


def test_centroid_near_origin_is_airm_midpoint():
    X = np.stack([np.diag([1.0, 4.0]), np.diag([9.0, 16.0])])
    part = Partition(np.array([0, 0]), np.eye(2)[None], AbldParams(1e-4, 1e-4), 0.0)
    out = update_centroids(X, part, RcgOptions(max_iters=300, rel_obj_tol=1e-15))
    np.testing.assert_allclose(out.centroids[0], np.diag([3.0, 8.0]), atol=1e-3)


def test_centroid_descends_and_optimal_is_fixed(blobs):
    X, part = blobs
    out = update_centroids(X, part)
    assert idc_objective(X, out) <= idc_objective(X, part)
    tight = RcgOptions(max_iters=300, rel_obj_tol=1e-15)
    opt = update_centroids(X, out, tight)
    again = update_centroids(X, opt, RcgOptions(max_iters=5, rel_obj_tol=1e-10))
    np.testing.assert_allclose(again.centroids, opt.centroids, atol=1e-6)


def test_empty_cluster_repaired(blobs):
    X, part = blobs
    assign = np.zeros(12, dtype=int)
    assign[6:] = 1
    p = Partition(assign, part.centroids, part.params)
    own = np.array([abld(X[i], p.centroids[assign[i]], p.params) for i in range(12)])
    out = update_centroids(X, p)
    np.testing.assert_array_equal(out.centroids[2], X[np.argmax(own)])


# ---------------------------------------------------------------------------
# parameter block


def test_params_large_mu_hits_floor(blobs):
    X, part = blobs
    big = Partition(part.assignments, part.centroids, AbldParams(1.0, 1.0), 1e6, "NE")
    out = update_divergence_params(X, big, SpgOptions(max_iters=50))
    assert out.params.alpha == pytest.approx(1e-4)
    assert out.params.beta == pytest.approx(1e-4)


def test_params_variant_e_stays_tied_and_descends(blobs):
    X, part = blobs
    out = update_divergence_params(X, part)
    assert out.params.alpha == out.params.beta
    assert idc_objective(X, out) <= idc_objective(X, part)


def test_params_fixed_point(blobs):
    X, part = blobs
    p = Partition(part.assignments, part.centroids, AbldParams(0.8, 0.5), 1.0, "NE")
    out = update_divergence_params(X, p, SpgOptions(max_iters=500, tol=1e-14))
    g = idc_grad_params(X, out)
    interior = np.array([out.params.alpha, out.params.beta]) > 1e-4 + 1e-9
    assert np.all(np.abs(g[interior]) <= 1e-6)


def test_params_origin_untouched(blobs):
    X, part = blobs
    p = Partition(part.assignments, part.centroids, AbldParams.origin(), 1.0)
    assert update_divergence_params(X, p) is p


# ---------------------------------------------------------------------------
# driver


@pytest.mark.parametrize("variant", ["E", "NE"])
def test_ab_kmeans_trace_and_stopping(wishart3, variant):
    part, rep = ab_kmeans(wishart3.samples, 3, variant, seed=0)
    assert _monotone(rep.objective_trace)
    assert rep.termination == "stable" and rep.n_outer <= 100
    assert rep.unchanged_fraction[-1] >= 0.999
    assert part.params.alpha > 0 and part.params.beta > 0
    if variant == "E":
        assert part.params.alpha == part.params.beta
    blocks = [t["block"] for t in rep.objective_trace[:4]]
    assert blocks == ["init", "centroids", "params", "assignments"]


def test_ab_kmeans_k1_and_kN(wishart3):
    X = wishart3.samples[:8]
    part, rep = ab_kmeans(X, 1, seed=0)
    assert rep.n_outer == 1 and np.all(part.assignments == 0)
    part, rep = ab_kmeans(X, 8, seed=0, opts=IdcOptions(max_outer=3))
    p = part.params
    assert idc_objective(X, part) == pytest.approx(p.alpha**2 + p.beta**2, abs=1e-8)


def test_ab_kmeans_guards(wishart3):
    with pytest.warns(RuntimeWarning):
        ab_kmeans(wishart3.samples[:6], 2, opts=IdcOptions(mu=0.0, max_outer=1))
    with pytest.raises(ValueError):
        ab_kmeans(wishart3.samples[:3], 4)
    with pytest.raises(ValueError):
        ab_kmeans(wishart3.samples[:6], 2, variant="X")


def test_ab_kmeans_negative_orthant(wishart3):
    part, _ = ab_kmeans(wishart3.samples, 3, "NE", opts=IdcOptions(orthant="negative", max_outer=5))
    assert part.params.alpha < 0 and part.params.beta < 0


# ---------------------------------------------------------------------------
# baselines


def test_le_kmeans_examples(rng):
    X = np.stack([np.eye(2), np.e**2 * np.eye(2)])
    np.testing.assert_allclose(le_kmeans(X, 1).centroids[0], np.e * np.eye(2), atol=1e-12)
    A = make_spd(rng, 3)
    part = le_kmeans(np.stack([A] * 5), 2)
    np.testing.assert_allclose(part.centroids, np.stack([A, A]), atol=1e-12)


def test_karcher_mean_two_is_midpoint(spd):
    X, Y = spd(3), spd(3)
    M = karcher_mean(np.stack([X, Y]))
    np.testing.assert_allclose(M, geodesic_midpoint(X, Y), atol=1e-6)
    M2 = geodesic_midpoint(np.diag([1.0, 4.0]), np.diag([9.0, 16.0]))
    np.testing.assert_allclose(M2, np.diag([3.0, 8.0]), atol=1e-12)


def test_karcher_kmeans_identical_samples(rng):
    A = make_spd(rng, 2)
    part = karcher_kmeans(np.stack([A] * 4), 2)
    np.testing.assert_allclose(part.centroids, np.stack([A, A]), atol=1e-10)


# ---------------------------------------------------------------------------
# F1


def test_f1_examples():
    assert f1_score([0, 0, 1, 1], [5, 5, 6, 6]) == 1.0
    assert f1_score([1, 1, 0, 0], [5, 5, 6, 6]) == 1.0
    assert f1_score([0, 0, 0, 0], [1, 1, 2, 2]) == pytest.approx(0.5)
    assert f1_score([0, 1, 2, 3], [1, 1, 2, 2]) == 0.0
    with pytest.raises(ValueError):
        f1_score([0, 1], [0, 1, 2])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=30), st.integers(0, 2**31 - 1))
def test_f1_relabel_invariant(assign, seed):
    rng = np.random.default_rng(seed)
    a = np.array(assign)
    truth = rng.integers(0, 3, size=len(a))
    perm = rng.permutation(4)
    assert f1_score(perm[a], truth) == pytest.approx(f1_score(a, truth), abs=1e-15)
    assert 0.0 <= f1_score(a, truth) <= 1.0


# ---------------------------------------------------------------------------
# estimators


def test_estimators(wishart3):
    X, y = wishart3.samples, wishart3.labels
    est = ABKMeans(n_clusters=3, variant="NE", random_state=0)
    assert clone(est).get_params() == est.get_params()
    labels = est.fit_predict(X)
    np.testing.assert_array_equal(labels, est.labels_)
    np.testing.assert_array_equal(est.predict(X), est.labels_)
    assert est.cluster_centers_.shape == (3, 4, 4)
    assert est.alpha_ > 0 and est.report_.termination == "stable"
    le = LogEuclideanKMeans(3, random_state=0).fit(X)
    np.testing.assert_array_equal(le.predict(X), le.labels_)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        kk = KarcherKMeans(3, random_state=0).fit(X)
    assert f1_score(kk.predict(X), y) >= 0.5
