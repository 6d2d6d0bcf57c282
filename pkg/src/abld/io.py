"""Binary dataset files and the trained-model container.

Dataset file (``.spd``), all little-endian::

    offset  size   field
    0       4      magic b"SPD1"
    4       4      uint32 version (1)
    8       8      uint64 N
    16      4      uint32 d
    20      1      uint8 has_labels
    21      3      padding (zero)
    24      8*N*d*d  float64 matrices, row-major
    ...     4*N    int32 labels, present iff has_labels

Model container (``.npz``, uncompressed) with entries ``atoms`` (n, d, d),
``alpha`` (n,), ``beta`` (n,), ``W`` (L, n) or (L, n+1), ``classes`` (L,)
and ``meta``, a UTF-8 JSON document stored as a uint8 array. ``meta`` holds
``format``, ``version``, ``dim``, ``n_atoms``, ``tying``, ``loss`` and any
training metadata passed by the caller.
"""

import json
import struct

import numpy as np

from .data import LabeledSpdDataset
from .iddl import Dictionary

MAGIC = b"SPD1"
VERSION = 1
_HEADER = struct.Struct("<4sIQIB3x")
MODEL_FORMAT = "abld-iddl-model"


class DatasetFormatError(ValueError):
    """Malformed or truncated dataset file."""


def write_dataset(path, samples, labels=None):
    samples = np.ascontiguousarray(samples, dtype="<f8")
    if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
        raise ValueError("samples must have shape (N, d, d)")
    n, d = samples.shape[0], samples.shape[1]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, d, int(labels is not None)))
        fh.write(samples.tobytes(order="C"))
        if labels is not None:
            lab = np.ascontiguousarray(labels, dtype="<i4")
            if lab.shape != (n,):
                raise ValueError("labels must have shape (N,)")
            fh.write(lab.tobytes())


def read_dataset_arrays(path):
    """Return ``(samples, labels_or_None)`` exactly as stored."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise DatasetFormatError("file shorter than header")
    magic, version, n, d, has_labels = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DatasetFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}")
    n_mat = 8 * n * d * d
    expected = _HEADER.size + n_mat + (4 * n if has_labels else 0)
    if len(raw) != expected:
        raise DatasetFormatError(f"payload is {len(raw)} bytes, header implies {expected}")
    off = _HEADER.size
    samples = np.frombuffer(raw, dtype="<f8", count=n * d * d, offset=off).reshape(n, d, d)
    labels = None
    if has_labels:
        labels = np.frombuffer(raw, dtype="<i4", count=n, offset=off + n_mat).copy()
    return samples.astype(np.float64), labels


def read_dataset(path):
    samples, labels = read_dataset_arrays(path)
    return LabeledSpdDataset(samples, labels)


def save_model(path, dictionary, W, classes, loss="ridge", meta=None):
    info = {
        "format": MODEL_FORMAT,
        "version": VERSION,
        "dim": int(dictionary.dim),
        "n_atoms": int(dictionary.n_atoms),
        "tying": dictionary.tying,
        "loss": loss,
    }
    info.update(meta or {})
    blob = np.frombuffer(json.dumps(info, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(
            fh,
            atoms=np.ascontiguousarray(dictionary.atoms, dtype="<f8"),
            alpha=np.asarray(dictionary.alpha, dtype="<f8"),
            beta=np.asarray(dictionary.beta, dtype="<f8"),
            W=np.asarray(W, dtype="<f8"),
            classes=np.asarray(classes),
            meta=blob,
        )


def load_model(path):
    """Return ``(dictionary, W, classes, meta)``."""
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(z["meta"].tobytes().decode("utf-8"))
        if meta.get("format") != MODEL_FORMAT:
            raise DatasetFormatError("not a model container")
        dictionary = Dictionary.__new__(Dictionary)
        # bypass validation so stored values come back untouched
        dictionary.atoms = z["atoms"].astype(np.float64)
        dictionary.alpha = z["alpha"].astype(np.float64)
        dictionary.beta = z["beta"].astype(np.float64)
        dictionary.tying = meta["tying"]
        return dictionary, z["W"].astype(np.float64), z["classes"], meta


def save_classifier(path, clf, meta=None):
    """Write a fitted :class:`~abld.iddl.IDDLClassifier`."""
    info = {"params": clf.get_params(), "report": clf.report_.to_dict()}
    info.update(meta or {})
    save_model(path, clf.dictionary_, clf.coef_, clf.classes_, clf.loss, info)


def load_classifier(path):
    from .iddl import IDDLClassifier

    dictionary, W, classes, meta = load_model(path)
    clf = IDDLClassifier(**meta.get("params", {"loss": meta["loss"], "tying": meta["tying"]}))
    clf.dictionary_ = dictionary
    clf.coef_ = W
    clf.classes_ = classes
    return clf
