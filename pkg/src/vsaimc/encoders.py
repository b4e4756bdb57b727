"""Encoders from low-dimensional data into hypervectors.

* ``ProjectionEncoder``: Rademacher random projection followed by sign (or
  threshold) quantization.
* ``LevelEmbedding``: feature values mapped onto L correlated level vectors
  obtained by bit-interpolating between two random endpoints.
* ``ngram_encode``: permutation-bound n-grams bundled into one vector.
* ``multimodal_encode``: per-modality key/value bundling, temporal
  permutation, and fusion by bundling across modalities.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidDimensionError, InvalidInputError, MissingItemError, ShapeError
from .hdvec import (
    DEFAULT_DIM,
    Codebook,
    HyperVector,
    Repr,
    bind,
    binarize_array,
    bundle,
    permute,
    rng_for,
)


def _finite_vector(features, n: int | None = None) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    if x.ndim != 1 or (n is not None and x.shape[0] != n):
        raise ShapeError(f"expected a feature vector of length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("features must be finite")
    return x


@dataclass(frozen=True)
class ProjectionEncoder:
    """H = quantize(F . E) with E an in_dim x out_dim matrix of +-1 entries.

    ``quantizer="sign"`` gives bipolar output; ``"threshold"`` gives binary
    output (1 where the projection exceeds ``threshold``). Exact zeros /
    threshold hits are resolved by the tie stream of ``seed``.
    """

    in_dim: int
    out_dim: int = DEFAULT_DIM
    seed: int = 0
    quantizer: str = "sign"
    threshold: float = 0.0

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise InvalidDimensionError("encoder dimensions must be positive")
        if self.quantizer not in ("sign", "threshold"):
            raise ValueError(f"unknown quantizer {self.quantizer!r}")

    @cached_property
    def matrix(self) -> np.ndarray:
        gen = rng_for("projection", self.seed, self.in_dim, self.out_dim)
        m = (2 * gen.integers(0, 2, (self.in_dim, self.out_dim), dtype=np.int8) - 1).astype(np.int8)
        m.setflags(write=False)
        return m

    @property
    def rows(self) -> list[HyperVector]:
        return [HyperVector(r, Repr.BIPOLAR) for r in self.matrix]

    @property
    def out_repr(self) -> Repr:
        return Repr.BIPOLAR if self.quantizer == "sign" else Repr.BINARY

    def accumulate(self, features) -> np.ndarray:
        x = _finite_vector(features, self.in_dim)
        return x @ self.matrix

    def _quantize(self, acc: np.ndarray) -> np.ndarray:
        pm = binarize_array(np.sign(acc - self.threshold), self.seed)
        return pm if self.quantizer == "sign" else ((pm + 1) // 2).astype(np.int8)

    def encode(self, features) -> HyperVector:
        return HyperVector(self._quantize(self.accumulate(features)), self.out_repr)

    def encode_batch(self, X) -> np.ndarray:
        """Encode rows of ``X``; returns an n_samples x out_dim int8 array
        in the encoder's output representation."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.in_dim:
            raise ShapeError(f"expected (n, {self.in_dim}) features, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("features must be finite")
        return self._quantize(X @ self.matrix)


def project_encode(enc: ProjectionEncoder, features) -> HyperVector:
    return enc.encode(features)


@dataclass(frozen=True)
class LevelEmbedding:
    """L level vectors over [low, high]; neighbouring levels are close.

    Level i equals the low endpoint with the first round(i * m / (L - 1))
    of the m endpoint-differing positions (in a seeded order) switched to
    the high endpoint, so hamming(level_i, level_j) grows linearly in |i - j|.
    """

    low: float = 0.0
    high: float = 1.0
    levels: int = 16
    dim: int = DEFAULT_DIM
    seed: int = 0
    name: str = "level"
    clamp: bool = True

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("a level embedding needs at least 2 levels")
        if not self.high > self.low:
            raise ValueError("high must exceed low")
        if self.dim < 1:
            raise InvalidDimensionError("dim must be >= 1")

    @cached_property
    def matrix(self) -> np.ndarray:
        gen = rng_for("level", self.name, self.seed, self.dim)
        lo = gen.integers(0, 2, self.dim, dtype=np.int8)
        hi = gen.integers(0, 2, self.dim, dtype=np.int8)
        diff = np.flatnonzero(lo != hi)
        order = gen.permutation(diff)
        out = np.empty((self.levels, self.dim), dtype=np.int8)
        for i in range(self.levels):
            k = int(round(i * len(order) / (self.levels - 1)))
            row = lo.copy()
            row[order[:k]] = hi[order[:k]]
            out[i] = row
        out.setflags(write=False)
        return out

    @property
    def level_hvs(self) -> list[HyperVector]:
        return [HyperVector(r, Repr.BINARY) for r in self.matrix]

    def bin(self, value: float) -> int:
        v = float(value)
        if np.isnan(v):
            raise InvalidInputError("cannot embed NaN")
        if not self.low <= v <= self.high:
            if not self.clamp:
                raise InvalidInputError(f"value {v} outside [{self.low}, {self.high}]")
            v = min(max(v, self.low), self.high)
        frac = (v - self.low) / (self.high - self.low)
        return min(int(frac * self.levels), self.levels - 1)

    def encode(self, value: float) -> HyperVector:
        return HyperVector(self.matrix[self.bin(value)], Repr.BINARY)


def level_encode(emb: LevelEmbedding, value: float) -> HyperVector:
    return emb.encode(value)


def ngram_encode(codebook: Codebook, sequence: Sequence[str], n: int, tie_break_seed: int = 0) -> HyperVector:
    """Bundle of rho^0(s_0) . rho^1(s_1) . ... . rho^(n-1)(s_(n-1)) over all n-grams."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seq = list(sequence)
    if len(seq) < n:
        raise ValueError(f"sequence of length {len(seq)} is shorter than n={n}")
    items = [codebook[s] for s in seq]
    grams = []
    for start in range(len(items) - n + 1):
        g = items[start]
        for k in range(1, n):
            g = bind(g, permute(items[start + k], k))
        grams.append(g)
    if len(grams) == 1:
        return grams[0]
    return bundle(grams, tie_break_seed)[1]


@dataclass(frozen=True)
class ModalRecord:
    modality: str
    features: Mapping[str, float]
    t: int = 0

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("timestamp index must be >= 0")


def feature_key(modality: str, feature: str) -> str:
    """Symbol under which a modality's feature-ID vector lives in the ID codebook."""
    return f"{modality}/{feature}"


def build_id_codebook(modalities: Mapping[str, Iterable[str]], seed: int = 0,
                      dim: int = DEFAULT_DIM, name: str = "feature-ids") -> Codebook:
    return Codebook.generate(name, [feature_key(m, f) for m, fs in modalities.items() for f in fs], seed, dim)


def registered_features(id_codebook: Codebook, modality: str) -> list[str]:
    prefix = f"{modality}/"
    return [s[len(prefix):] for s in id_codebook.symbols if s.startswith(prefix)]


def encode_record(rec: ModalRecord, id_codebook: Codebook, value_emb: LevelEmbedding,
                  tie_break_seed: int = 0) -> HyperVector:
    """bundle_f bind(id_f, value_f), rotated by the record's timestamp."""
    declared = registered_features(id_codebook, rec.modality)
    if not declared:
        raise MissingItemError(f"modality {rec.modality!r} is not registered")
    if set(rec.features) != set(declared):
        raise ShapeError(f"modality {rec.modality!r} expects features {sorted(declared)}, "
                         f"got {sorted(rec.features)}")
    pairs = [bind(id_codebook[feature_key(rec.modality, f)], value_emb.encode(rec.features[f]))
             for f in declared]
    hv = pairs[0] if len(pairs) == 1 else bundle(pairs, tie_break_seed)[1]
    return permute(hv, rec.t)


def encode_modalities(records: Sequence[ModalRecord], id_codebook: Codebook, value_emb: LevelEmbedding,
                      tie_break_seed: int = 0) -> dict[str, HyperVector]:
    """One hypervector per modality: bundle over its timestamps."""
    if not records:
        raise InvalidInputError("no records to encode")
    if value_emb.dim != id_codebook.dim:
        raise ShapeError("value embedding and ID codebook dims differ")
    per: dict[str, list[HyperVector]] = defaultdict(list)
    for rec in records:
        per[rec.modality].append(encode_record(rec, id_codebook, value_emb, tie_break_seed))
    return {m: (vs[0] if len(vs) == 1 else bundle(vs, tie_break_seed)[1]) for m, vs in per.items()}


def multimodal_encode(records: Sequence[ModalRecord], id_codebook: Codebook, value_emb: LevelEmbedding,
                      tie_break_seed: int = 0) -> HyperVector:
    modal = list(encode_modalities(records, id_codebook, value_emb, tie_break_seed).values())
    return modal[0] if len(modal) == 1 else bundle(modal, tie_break_seed)[1]
