"""Seeded synthetic workloads used by the tests, the CLI and the cost model."""

from __future__ import annotations

import numpy as np


def make_blobs(n_samples: int = 200, n_features: int = 16, n_classes: int = 2,
               spread: float = 1.0, separation: float = 3.0, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Isotropic Gaussian blobs with centres drawn N(0, separation^2)."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=separation, size=(n_classes, n_features))
    y = np.arange(n_samples) % n_classes
    rng.shuffle(y)
    X = centers[y] + rng.normal(scale=spread, size=(n_samples, n_features))
    return X, y


def train_test_split(X, y, test_fraction: float = 0.3, seed: int = 0):
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(X))
    cut = int(round(len(X) * (1 - test_fraction)))
    tr, te = idx[:cut], idx[cut:]
    return X[tr], y[tr], X[te], y[te]


def random_graph(n_nodes: int = 50, p: float = 0.1, seed: int = 0) -> list[tuple[int, int]]:
    """Erdos-Renyi G(n, p) edge list with i < j."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n_nodes, n_nodes)) < p, k=1)
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(upper))]


def layered_features(n_samples: int = 200, layer_dims=(64, 128, 32), n_classes: int = 3, seed: int = 0,
                     shifted: bool = False, draw: int = 0) -> tuple[list[np.ndarray], np.ndarray]:
    """Per-layer activations clustered around seeded class centres.

    ``shifted=True`` draws from a broad distribution unrelated to the centres,
    standing in for out-of-distribution inputs.
    """
    centres = [np.random.default_rng([seed, i]).normal(scale=2.0, size=(n_classes, d))
               for i, d in enumerate(layer_dims)]
    rng = np.random.default_rng([seed, len(layer_dims), int(shifted), draw])
    y = rng.integers(0, n_classes, n_samples)
    if shifted:
        return [rng.normal(scale=2.0, size=(n_samples, d)) for d in layer_dims], y
    return [c[y] + rng.normal(size=(n_samples, c.shape[1])) for c in centres], y
