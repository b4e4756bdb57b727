"""Supervised HD classification and HDCluster-style clustering.

Class accumulators are held in fixed point (``FRAC_BITS`` fractional bits)
so the perceptron-style retraining update stays exact: a step of
eta * (1 - delta) is rounded once to the fixed-point grid and then added to
the true class and subtracted from the predicted class.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from math import comb
from typing import Any, Callable, Sequence

import numpy as np

from .errors import (
    DegenerateClassError,
    InvalidHyperparameterError,
    InvalidKError,
    ModelStateError,
    ShapeError,
)
from .hdvec import HyperVector, Metric, Repr, binarize_array, rng_for

FRAC_BITS = 24
_SCALE = 1 << FRAC_BITS


def as_bipolar_matrix(data) -> np.ndarray:
    """Stack hypervectors (or a +-1 / 0-1 int array) into an n x D +-1 int8 matrix."""
    if isinstance(data, HyperVector):
        data = [data]
    if isinstance(data, (list, tuple)) and data and isinstance(data[0], HyperVector):
        dims = {hv.dim for hv in data}
        if len(dims) != 1:
            raise ShapeError("hypervectors must share a dimension")
        return np.stack([hv.as_bipolar_array() for hv in data]).astype(np.int8)
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D array of hypervectors, got shape {arr.shape}")
    if np.isin(arr, (-1, 1)).all():
        return arr.astype(np.int8)
    if np.isin(arr, (0, 1)).all():
        return (2 * arr - 1).astype(np.int8)
    raise ShapeError("array is not a stack of binary or bipolar hypervectors")


def _encode(encoder, X) -> np.ndarray:
    if encoder is None:
        return as_bipolar_matrix(X)
    out = encoder.encode_batch(X)
    return out if getattr(encoder, "out_repr", Repr.BIPOLAR) is Repr.BIPOLAR else (2 * out - 1).astype(np.int8)


# ── classification ──────────────────────────────────────────────────────


@dataclass
class ClassifierModel:
    classes: list
    accum_fixed: np.ndarray  # k x D int64, value * 2**FRAC_BITS
    encoder: Any = None
    metric: Metric = Metric.COSINE
    tie_break_seed: int = 0
    binarized: np.ndarray | None = None  # k x D, +-1
    history: list[dict] = field(default_factory=list)

    def __post_init__(self):
        self.metric = Metric(self.metric)
        if self.binarized is None and self.accum_fixed is not None:
            self.refresh()

    @property
    def dim(self) -> int:
        return self.accum_fixed.shape[1]

    @property
    def accum(self) -> np.ndarray:
        return self.accum_fixed / _SCALE

    def refresh(self) -> None:
        self.binarized = binarize_array(self.accum_fixed, self.tie_break_seed)

    def class_vectors(self) -> list[HyperVector]:
        """Binary snapshots C_l^b."""
        return [HyperVector(((b + 1) // 2).astype(np.int8), Repr.BINARY) for b in self.binarized]

    def check_trained(self) -> None:
        if self.accum_fixed is None or not self.classes or self.binarized is None:
            raise ModelStateError("model has not been trained")

    def scores(self, Q: np.ndarray) -> np.ndarray:
        """Similarity of each query row to each binarized class, per ``metric``."""
        dots = Q.astype(np.int64) @ self.binarized.T.astype(np.int64)
        D = self.dim
        if self.metric is Metric.DOT:
            return dots.astype(float)
        if self.metric is Metric.HAMMING:
            return (D - dots) / (2.0 * D)
        return dots / float(D)

    def _rank(self, scores: np.ndarray) -> np.ndarray:
        return 1.0 - scores if self.metric is Metric.HAMMING else scores

    def predict_encoded(self, Q: np.ndarray) -> np.ndarray:
        self.check_trained()
        return np.argmax(self._rank(self.scores(Q)), axis=1)


def train_single_pass(X, y, encoder=None, classes: Sequence | None = None,
                      metric: Metric = Metric.COSINE, tie_break_seed: int = 0) -> ClassifierModel:
    """C_l = sum of encoded samples labelled l."""
    Q = _encode(encoder, X)
    y = np.asarray(y)
    if len(y) != len(Q):
        raise ShapeError("labels and samples differ in length")
    classes = list(classes) if classes is not None else sorted(set(y.tolist()))
    accum = np.zeros((len(classes), Q.shape[1]), dtype=np.int64)
    for i, c in enumerate(classes):
        members = Q[y == c]
        if len(members) == 0:
            raise DegenerateClassError(f"class {c!r} has no samples")
        accum[i] = members.astype(np.int64).sum(axis=0) * _SCALE
    return ClassifierModel(classes, accum, encoder, metric, tie_break_seed)


def retrain_iterative(model: ClassifierModel, X, y, eta: float, epochs: int,
                      on_update: Callable[[int, int, np.ndarray], None] | None = None) -> ClassifierModel:
    """Perceptron-style refinement on misclassified samples.

    For a sample with encoding Q, true class l and predicted class l':
    C_l += eta(1 - delta) Q and C_l' -= eta(1 - delta) Q, with delta the
    similarity of Q to the predicted binarized class mapped to [0, 1]
    (``(1 + cos) / 2``). Updates are online; snapshots refresh per epoch.
    Returns a new model; ``model`` is left untouched.
    """
    if not eta > 0:
        raise InvalidHyperparameterError(f"eta must be > 0, got {eta}")
    if epochs < 0:
        raise InvalidHyperparameterError("epochs must be >= 0")
    model.check_trained()
    out = copy.deepcopy(model)
    Q = _encode(out.encoder, X)
    index = {c: i for i, c in enumerate(out.classes)}
    try:
        truth = np.array([index[c] for c in np.asarray(y).tolist()])
    except KeyError as exc:
        raise ShapeError(f"label {exc.args[0]!r} is not a model class") from None
    D = out.dim
    for epoch in range(epochs):
        wrong = 0
        for q, l in zip(Q, truth):
            dots = out.binarized.astype(np.int64) @ q.astype(np.int64)
            pred = int(np.argmax(dots))
            if pred == l:
                continue
            wrong += 1
            delta = (1.0 + dots[pred] / D) / 2.0
            step = int(round(eta * (1.0 - delta) * _SCALE))
            upd = step * q.astype(np.int64)
            out.accum_fixed[l] += upd
            out.accum_fixed[pred] -= upd
            if on_update is not None:
                on_update(int(l), pred, upd / _SCALE)
        out.refresh()
        out.history.append({"epoch": epoch, "misclassified": wrong})
        if wrong == 0:
            break
    return out


def infer(model: ClassifierModel, query) -> tuple[Any, dict]:
    """Label and per-class scores for a raw feature vector (or a hypervector)."""
    model.check_trained()
    if isinstance(query, HyperVector):
        Q = as_bipolar_matrix([query])
    elif model.encoder is None:
        raise ModelStateError("model has no encoder; pass a hypervector")
    else:
        Q = _encode(model.encoder, np.asarray(query, dtype=float)[None, :])
    s = model.scores(Q)[0]
    i = int(np.argmax(model._rank(s)))
    return model.classes[i], {c: float(v) for c, v in zip(model.classes, s)}


def predict(model: ClassifierModel, X) -> list:
    idx = model.predict_encoded(_encode(model.encoder, X))
    return [model.classes[i] for i in idx]


def accuracy(model: ClassifierModel, X, y) -> float:
    pred = predict(model, X)
    return float(np.mean([p == t for p, t in zip(pred, np.asarray(y).tolist())]))


# ── clustering ──────────────────────────────────────────────────────────


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray  # k x D int64 accumulators
    binarized: np.ndarray  # k x D +-1
    assignments: np.ndarray
    history: list[np.ndarray] = field(default_factory=list)
    changes: list[int] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    def centroid_vectors(self) -> list[HyperVector]:
        return [HyperVector(b, Repr.BIPOLAR) for b in self.binarized]


def _spread_init(X: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Seeded first pick, then repeatedly the sample farthest (Hamming) from all picks."""
    n = len(X)
    picks = [int(rng_for("cluster-init", seed).integers(n))]
    best = X.astype(np.int64) @ X[picks[0]].astype(np.int64)
    for _ in range(1, k):
        nxt = int(np.argmin(best))
        picks.append(nxt)
        best = np.maximum(best, X.astype(np.int64) @ X[nxt].astype(np.int64))
    return X[picks].copy()


def cluster(data, k: int, max_iters: int = 50, seed: int = 0, init: str = "spread") -> ClusterModel:
    """K-means over hypervectors with binarized centroids and Hamming assignment.

    ``init="spread"`` seeds centroids with maximally separated samples;
    ``init="random"`` uses fresh random hypervectors. Iteration stops when no
    assignment changes or after ``max_iters`` rounds.
    """
    X = as_bipolar_matrix(data)
    n, D = X.shape
    if k < 1 or k > n:
        raise InvalidKError(f"k must lie in [1, {n}], got {k}")
    if max_iters < 1:
        raise InvalidHyperparameterError("max_iters must be >= 1")
    if init == "spread":
        B = _spread_init(X, k, seed)
    elif init == "random":
        B = (2 * rng_for("cluster-random", seed).integers(0, 2, (k, D)) - 1).astype(np.int8)
    else:
        raise ValueError(f"unknown init {init!r}")
    C = B.astype(np.int64)
    assign = np.full(n, -1)
    model = ClusterModel(k, C, B, assign)
    for it in range(max_iters):
        sims = X.astype(np.int64) @ B.T.astype(np.int64)  # = D - 2 * hamming
        new = np.argmax(sims, axis=1)
        changed = int(np.count_nonzero(new != assign))
        assign = new
        model.history.append(assign.copy())
        model.changes.append(changed)
        model.iterations = it + 1
        if changed == 0:
            model.converged = True
            break
        for c in range(k):
            members = X[assign == c]
            if len(members):
                C[c] = members.astype(np.int64).sum(axis=0)
                B[c] = binarize_array(C[c], seed)
    model.centroids, model.binarized, model.assignments = C, B, assign
    return model


def adjusted_rand_index(labels_true, labels_pred) -> float:
    """Hubert-Arabie ARI from the contingency table."""
    a, b = np.asarray(labels_true), np.asarray(labels_pred)
    if a.shape != b.shape:
        raise ShapeError("label arrays differ in length")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    n = len(a)
    sum_ij = sum(comb(int(v), 2) for v in table.ravel())
    sum_a = sum(comb(int(v), 2) for v in table.sum(axis=1))
    sum_b = sum(comb(int(v), 2) for v in table.sum(axis=0))
    total = comb(n, 2)
    expected = sum_a * sum_b / total if total else 0.0
    max_idx = (sum_a + sum_b) / 2
    if max_idx == expected:
        return 1.0
    return (sum_ij - expected) / (max_idx - expected)
