import json

import numpy as np
import pytest

from abld.data import (
    LabeledSpdDataset,
    WishartSpec,
    cov_descriptor,
    normalize_dataset,
    random_scale_matrix,
    wishart_synth,
)
from abld.divergence import AbldParams, abld
from abld.exceptions import DomainError, NotPositiveDefinite
from abld.iddl import Dictionary, IDDLClassifier
from abld.io import (
    DatasetFormatError,
    load_classifier,
    load_model,
    read_dataset,
    read_dataset_arrays,
    save_classifier,
    save_model,
    write_dataset,
)
from abld.linalg import check_spd, sym_eig


# ---------------------------------------------------------------------------
# synthetic data


def test_wishart_shapes_and_determinism():
    spec = WishartSpec(k=3, d=4, n_per=6, seed=11)
    a, b = wishart_synth(spec), wishart_synth(WishartSpec(k=3, d=4, n_per=6, seed=11))
    assert a.samples.shape == (18, 4, 4)
    np.testing.assert_array_equal(a.labels, np.repeat([1, 2, 3], 6))
    assert a.samples.tobytes() == b.samples.tobytes()
    check_spd(a.samples)
    c = wishart_synth(WishartSpec(k=3, d=4, n_per=6, seed=12))
    assert not np.array_equal(a.samples, c.samples)
    assert spec.dof == 8


def test_wishart_cluster_mean_is_scale_matrix():
    spec = WishartSpec(k=1, d=3, n_per=4000, seed=2)
    ds = wishart_synth(spec)
    # replay the generator's first draw to recover the scale matrix
    sigma = random_scale_matrix(3, np.random.default_rng(2))
    mean = ds.samples.mean(axis=0)
    # entrywise std of a Wishart mean: sqrt((s_ij^2 + s_ii s_jj) / (dof n))
    sd = np.sqrt((sigma**2 + np.outer(np.diag(sigma), np.diag(sigma))) / (spec.dof * spec.n_per))
    assert np.all(np.abs(mean - sigma) <= 3 * sd + 1e-12)


def test_wishart_spec_validation():
    with pytest.raises(DomainError):
        WishartSpec(k=2, d=4, n_per=5, dof=3)
    with pytest.raises(DomainError):
        WishartSpec(k=0, d=4, n_per=5)


def test_scale_matrix_spectrum(rng):
    w = sym_eig(random_scale_matrix(6, rng)).values
    assert w.min() >= 0.5 - 1e-12 and w.max() <= 2.0 + 1e-12


def test_cov_descriptor_examples(rng):
    F = rng.standard_normal((20000, 3))
    np.testing.assert_allclose(cov_descriptor(F), np.eye(3), atol=0.05)
    np.testing.assert_allclose(cov_descriptor(np.ones((10, 2)), jitter=0.1), 0.1 * np.eye(2))
    C = cov_descriptor(np.array([[1.0], [3.0], [5.0]]))
    assert C.shape == (1, 1) and C[0, 0] == pytest.approx(4.0)
    with pytest.raises(NotPositiveDefinite):
        cov_descriptor(np.ones((10, 2)))
    with pytest.raises(DomainError):
        cov_descriptor(np.ones((1, 3)))


def test_normalize_dataset(rng):
    ds = wishart_synth(WishartSpec(k=2, d=3, n_per=5, seed=0))
    out = normalize_dataset(ds, 2.0)
    assert sym_eig(out.samples).values[:, -1].max() == pytest.approx(2.0, rel=1e-12)
    again = normalize_dataset(out.samples, 2.0)
    np.testing.assert_allclose(again, out.samples, rtol=1e-14)
    p = AbldParams(0.6, 1.3)
    for i, j in ((0, 1), (2, 7)):
        before = abld(ds.samples[i], ds.samples[j], p)
        after = abld(out.samples[i], out.samples[j], p)
        assert after == pytest.approx(before, abs=1e-10)
    np.testing.assert_array_equal(out.labels, ds.labels)


def test_dataset_container(rng):
    ds = wishart_synth(WishartSpec(k=2, d=3, n_per=4, seed=0))
    H = ds.onehot()
    assert H.shape == (2, 8) and np.all(H.sum(axis=0) == 1)
    sub = ds.subset([1, 6])
    np.testing.assert_array_equal(sub.labels, [1, 2])
    np.testing.assert_allclose(sub.isqrt, ds.isqrt[[1, 6]])
    with pytest.raises(DomainError):
        LabeledSpdDataset(ds.samples, [1, 2])
    with pytest.raises(DomainError):
        LabeledSpdDataset(np.eye(3))


# ---------------------------------------------------------------------------
# dataset file


def test_dataset_roundtrip_bit_exact(tmp_path):
    ds = wishart_synth(WishartSpec(k=2, d=5, n_per=7, seed=4))
    p = tmp_path / "d.spd"
    write_dataset(p, ds.samples, ds.labels)
    assert p.stat().st_size == 24 + 8 * 14 * 25 + 4 * 14
    X, y = read_dataset_arrays(p)
    assert X.tobytes() == ds.samples.tobytes()
    np.testing.assert_array_equal(y, ds.labels)
    write_dataset(tmp_path / "u.spd", ds.samples)
    X2, y2 = read_dataset_arrays(tmp_path / "u.spd")
    assert y2 is None and X2.tobytes() == ds.samples.tobytes()
    assert read_dataset(p).n_classes == 2


def test_dataset_header_layout(tmp_path):
    p = tmp_path / "d.spd"
    write_dataset(p, np.stack([np.eye(2)] * 3), [1, 2, 3])
    raw = p.read_bytes()
    assert raw[:4] == b"SPD1"
    assert int.from_bytes(raw[4:8], "little") == 1
    assert int.from_bytes(raw[8:16], "little") == 3
    assert int.from_bytes(raw[16:20], "little") == 2
    assert raw[20] == 1 and raw[21:24] == b"\0\0\0"


def test_dataset_format_errors(tmp_path):
    p = tmp_path / "d.spd"
    write_dataset(p, np.stack([np.eye(2)] * 3), [1, 2, 3])
    raw = p.read_bytes()
    bad = tmp_path / "bad.spd"
    bad.write_bytes(raw[:-1])
    with pytest.raises(DatasetFormatError):
        read_dataset_arrays(bad)
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(DatasetFormatError):
        read_dataset_arrays(bad)
    bad.write_bytes(raw[:10])
    with pytest.raises(DatasetFormatError):
        read_dataset_arrays(bad)
    bad.write_bytes(raw[:4] + (2).to_bytes(4, "little") + raw[8:])
    with pytest.raises(DatasetFormatError):
        read_dataset_arrays(bad)
    with pytest.raises(ValueError):
        write_dataset(bad, np.ones((2, 2, 3)))


# ---------------------------------------------------------------------------
# model container


def test_model_roundtrip_bit_exact(tmp_path, rng):
    atoms = np.stack([random_scale_matrix(3, rng) for _ in range(4)])
    d = Dictionary(atoms, rng.uniform(0.1, 2, 4), rng.uniform(0.1, 2, 4), "N")
    W = rng.standard_normal((3, 5))
    p = tmp_path / "m.npz"
    save_model(p, d, W, np.array([2, 5, 9]), "ssvm", {"note": "x"})
    d2, W2, classes, meta = load_model(p)
    for a, b in ((d.atoms, d2.atoms), (d.alpha, d2.alpha), (d.beta, d2.beta), (W, W2)):
        assert a.tobytes() == b.tobytes()
    np.testing.assert_array_equal(classes, [2, 5, 9])
    assert meta["loss"] == "ssvm" and meta["tying"] == "N" and meta["note"] == "x"
    assert meta["dim"] == 3 and meta["n_atoms"] == 4


def test_model_container_rejects_other_npz(tmp_path):
    p = tmp_path / "x.npz"
    meta = np.frombuffer(json.dumps({"format": "other"}).encode(), dtype=np.uint8)
    np.savez(p, meta=meta)
    with pytest.raises(DatasetFormatError):
        load_model(p)


def test_classifier_roundtrip(tmp_path):
    ds = wishart_synth(WishartSpec(k=2, d=3, n_per=10, seed=1))
    clf = IDDLClassifier(n_atoms=4, max_iter=2, rcg_iters=2, random_state=0)
    clf.fit(ds.samples, ds.labels)
    p = tmp_path / "c.npz"
    save_classifier(p, clf)
    back = load_classifier(p)
    assert back.get_params() == clf.get_params()
    np.testing.assert_array_equal(back.predict(ds.samples), clf.predict(ds.samples))
    assert back.decision_function(ds.samples).tobytes() == clf.decision_function(ds.samples).tobytes()
