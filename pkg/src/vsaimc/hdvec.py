"""Hypervector algebra: representations, seeded generation, bind/unbind,
bundle, permute, similarity and noise injection.

Binary vectors bind by XOR, bipolar vectors by elementwise product. The
Binary<->Bipolar conversion is 0 <-> -1, 1 <-> +1. Cosine and dot products on
binary vectors are taken on that bipolar view, so cos = 1 - 2 * hamming.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyBundleError,
    InvalidDimensionError,
    InvalidProbabilityError,
    MissingItemError,
    ShapeError,
    UndefinedSimilarityError,
)

DEFAULT_DIM = 10_000
ACCUM_WIDTH = 32


class Repr(str, Enum):
    BINARY = "binary"
    BIPOLAR = "bipolar"
    INT = "int"


class Metric(str, Enum):
    HAMMING = "hamming"
    COSINE = "cosine"
    DOT = "dot"


# ── deterministic randomness ────────────────────────────────────────────


def _key(parts: Sequence[object]) -> int:
    h = hashlib.blake2b(digest_size=16)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def derive_seed(*parts: object) -> int:
    """Stable 63-bit integer seed derived from a tuple of labels."""
    return _key(parts) & ((1 << 63) - 1)


def rng_for(*parts: object) -> np.random.Generator:
    """Counter-based generator keyed by an arbitrary tuple of labels.

    Streams for different keys are independent, so an item's vector never
    depends on the order in which items were generated.
    """
    return np.random.Generator(np.random.Philox(key=_key(parts)))


@lru_cache(maxsize=256)
def _tie_bits(seed: int, dim: int) -> np.ndarray:
    bits = rng_for("tie", seed).integers(0, 2, dim, dtype=np.int8).astype(bool)
    bits.setflags(write=False)
    return bits


def tie_bits(seed: int, dim: int) -> np.ndarray:
    """Read-only boolean stream used to resolve zero sums for ``seed``."""
    return _tie_bits(int(seed), int(dim))


# ── the value type ──────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class HyperVector:
    """Immutable D-dimensional hypervector.

    ``data`` holds 0/1 (BINARY), -1/+1 (BIPOLAR) as int8, or signed integers
    of at most ``width`` bits (INT accumulators) as int64.
    """

    data: np.ndarray
    repr: Repr = Repr.BINARY
    width: int = 1

    def __post_init__(self):
        rep = Repr(self.repr)
        arr = np.asarray(self.data)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidDimensionError(f"hypervector must be 1-D and non-empty, got shape {arr.shape}")
        if rep is Repr.BINARY:
            if not ((arr == 0) | (arr == 1)).all():
                raise ValueError("binary hypervector elements must be 0 or 1")
            arr = arr.astype(np.int8)
            width = 1
        elif rep is Repr.BIPOLAR:
            if not ((arr == -1) | (arr == 1)).all():
                raise ValueError("bipolar hypervector elements must be -1 or +1")
            arr = arr.astype(np.int8)
            width = 1
        else:
            width = int(self.width) if self.width and self.width > 1 else ACCUM_WIDTH
            if not 2 <= width <= 64:
                raise ValueError(f"accumulator width must be in [2, 64], got {width}")
            if not np.issubdtype(arr.dtype, np.integer):
                if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
                    raise ValueError("integer accumulator elements must be integral")
            arr = arr.astype(np.int64)
            lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
            if arr.min() < lo or arr.max() > hi:
                raise ValueError(f"accumulator values exceed signed {width}-bit range")
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "repr", rep)
        object.__setattr__(self, "width", width)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other) -> bool:
        if not isinstance(other, HyperVector):
            return NotImplemented
        return self.repr is other.repr and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.repr, self.data.tobytes()))

    def __repr__(self) -> str:
        head = "".join(str(int(x)) if x >= 0 else "-" for x in self.data[:16])
        more = "..." if self.dim > 16 else ""
        return f"HyperVector(dim={self.dim}, repr={self.repr.value}, data=[{head}{more}])"

    def as_bipolar_array(self) -> np.ndarray:
        """Numeric view used by cosine/dot: -1/+1 for binary and bipolar."""
        if self.repr is Repr.BINARY:
            return (2 * self.data - 1).astype(np.int8)
        return self.data

    def to_bipolar(self) -> HyperVector:
        if self.repr is Repr.BIPOLAR:
            return self
        if self.repr is Repr.INT:
            raise ShapeError("accumulators convert to bipolar through binarize()")
        return HyperVector(self.as_bipolar_array(), Repr.BIPOLAR)

    def to_binary(self) -> HyperVector:
        if self.repr is Repr.BINARY:
            return self
        if self.repr is Repr.INT:
            raise ShapeError("accumulators convert to binary through binarize()")
        return HyperVector((self.data > 0).astype(np.int8), Repr.BINARY)

    def to_repr(self, rep: Repr) -> HyperVector:
        return self.to_binary() if Repr(rep) is Repr.BINARY else self.to_bipolar()


def from_bits(bits: str | Iterable[int], rep: Repr = Repr.BINARY) -> HyperVector:
    """Build a vector from a bit string like ``"01101001"``."""
    if isinstance(bits, str):
        vals = np.fromiter((int(c) for c in bits), dtype=np.int8)
    else:
        vals = np.asarray(list(bits), dtype=np.int8)
    hv = HyperVector(vals, Repr.BINARY)
    return hv.to_repr(rep)


def to_bits(hv: HyperVector) -> str:
    return "".join(str(int(b)) for b in hv.to_binary().data)


# ── generation ──────────────────────────────────────────────────────────


def random_hv(
    codebook_name: str,
    symbol: str,
    seed: int,
    dim: int = DEFAULT_DIM,
    repr: Repr = Repr.BINARY,
    width: int = 8,
) -> HyperVector:
    """Seeded random item vector, i.i.d. uniform over the representation's alphabet."""
    if dim < 1:
        raise InvalidDimensionError(f"dim must be >= 1, got {dim}")
    rep = Repr(repr)
    gen = rng_for("item", codebook_name, symbol, int(seed), int(dim), rep.value)
    if rep is Repr.INT:
        lo, hi = -(1 << (width - 1)), (1 << (width - 1))
        return HyperVector(gen.integers(lo, hi, dim, dtype=np.int64), Repr.INT, width)
    bits = gen.integers(0, 2, dim, dtype=np.int8)
    if rep is Repr.BIPOLAR:
        return HyperVector(2 * bits - 1, Repr.BIPOLAR)
    return HyperVector(bits, Repr.BINARY)


# ── binding ─────────────────────────────────────────────────────────────


def _check_pair(a: HyperVector, b: HyperVector) -> None:
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.repr is not b.repr:
        raise ShapeError(f"representation mismatch: {a.repr.value} vs {b.repr.value}")
    if a.repr is Repr.INT:
        raise ShapeError("binding is defined for binary and bipolar vectors only")


def bind(a: HyperVector, b: HyperVector) -> HyperVector:
    """XOR for binary vectors, elementwise product for bipolar."""
    _check_pair(a, b)
    if a.repr is Repr.BINARY:
        return HyperVector(np.bitwise_xor(a.data, b.data), Repr.BINARY)
    return HyperVector(a.data * b.data, Repr.BIPOLAR)


def unbind(x: HyperVector, b: HyperVector) -> HyperVector:
    # XOR and +-1 multiplication are self-inverse.
    return bind(x, b)


# ── bundling ────────────────────────────────────────────────────────────


def binarize_array(acc: np.ndarray, tie_break_seed: int) -> np.ndarray:
    """Majority sign of an accumulator as a +-1 int8 array; zeros use the tie stream."""
    acc = np.asarray(acc)
    out = np.where(acc > 0, 1, -1).astype(np.int8)
    zeros = acc == 0
    if zeros.any():
        ties = tie_bits(tie_break_seed, acc.shape[-1])
        if acc.ndim == 1:
            out[zeros] = np.where(ties[zeros], 1, -1)
        else:
            tie_pm = np.where(ties, 1, -1).astype(np.int8)
            out = np.where(zeros, tie_pm, out).astype(np.int8)
    return out


def binarize(acc: HyperVector | np.ndarray, tie_break_seed: int = 0, repr: Repr = Repr.BINARY) -> HyperVector:
    data = acc.data if isinstance(acc, HyperVector) else acc
    pm = binarize_array(data, tie_break_seed)
    hv = HyperVector(pm, Repr.BIPOLAR)
    return hv.to_repr(repr)


def bundle(inputs: Sequence[HyperVector], tie_break_seed: int = 0) -> tuple[HyperVector, HyperVector]:
    """Superpose vectors.

    Returns ``(accumulator, binarized)``: the accumulator is the elementwise
    sum of the bipolar views; the binarized vector is the elementwise
    majority, in the inputs' representation (bipolar for accumulator inputs).
    """
    inputs = list(inputs)
    if not inputs:
        raise EmptyBundleError("cannot bundle an empty list")
    first = inputs[0]
    for hv in inputs[1:]:
        if hv.dim != first.dim or hv.repr is not first.repr:
            raise ShapeError("bundled vectors must share dim and representation")
    acc = np.zeros(first.dim, dtype=np.int64)
    for hv in inputs:
        acc += hv.as_bipolar_array()
    out_repr = Repr.BIPOLAR if first.repr is Repr.INT else first.repr
    return HyperVector(acc, Repr.INT, ACCUM_WIDTH), binarize(acc, tie_break_seed, out_repr)


# ── permutation ─────────────────────────────────────────────────────────


def permute(a: HyperVector, k: int = 1) -> HyperVector:
    """Cyclic rotation to the right by ``k`` positions (``k`` taken mod D)."""
    return HyperVector(np.roll(a.data, int(k) % a.dim), a.repr, a.width)


# ── similarity ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SimilarityScore:
    metric: Metric
    value: float

    @property
    def rank(self) -> float:
        """Higher-is-more-similar view; hamming distance h becomes 1 - h."""
        return 1.0 - self.value if self.metric is Metric.HAMMING else self.value

    def __float__(self) -> float:
        return float(self.value)


def similarity(a: HyperVector, b: HyperVector, metric: Metric = Metric.COSINE) -> SimilarityScore:
    metric = Metric(metric)
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if metric is Metric.HAMMING:
        if Repr.INT in (a.repr, b.repr):
            raise ShapeError("normalized Hamming needs binary or bipolar vectors")
        diff = np.count_nonzero(a.as_bipolar_array() != b.as_bipolar_array())
        return SimilarityScore(metric, diff / a.dim)
    x = a.as_bipolar_array().astype(np.int64)
    y = b.as_bipolar_array().astype(np.int64)
    dot = int(x @ y)
    if metric is Metric.DOT:
        return SimilarityScore(metric, float(dot))
    nx, ny = float(np.sqrt(x @ x)), float(np.sqrt(y @ y))
    if nx == 0.0 or ny == 0.0:
        raise UndefinedSimilarityError("cosine similarity of a zero-norm vector")
    return SimilarityScore(metric, float(np.clip(dot / (nx * ny), -1.0, 1.0)))


def hamming(a: HyperVector, b: HyperVector) -> int:
    """Raw count of differing positions."""
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return int(np.count_nonzero(a.as_bipolar_array() != b.as_bipolar_array()))


# ── noise ───────────────────────────────────────────────────────────────


def flip_mask(p: float, seed: int, dim: int, *salt: object) -> np.ndarray:
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise InvalidProbabilityError(f"flip probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return np.zeros(dim, dtype=bool)
    if p == 1.0:
        return np.ones(dim, dtype=bool)
    return rng_for("noise", int(seed), *salt).random(dim) < p


def inject_noise(a: HyperVector, p: float, seed: int) -> HyperVector:
    """Flip each element independently with probability ``p``."""
    mask = flip_mask(p, seed, a.dim)
    if a.repr is Repr.BINARY:
        return HyperVector(np.where(mask, 1 - a.data, a.data), Repr.BINARY)
    return HyperVector(np.where(mask, -a.data, a.data), a.repr, a.width)


# ── item memory ─────────────────────────────────────────────────────────


@dataclass
class Codebook:
    """Named item memory: symbol -> seeded random hypervector."""

    name: str
    dim: int = DEFAULT_DIM
    seed: int = 0
    repr: Repr = Repr.BINARY
    entries: dict[str, HyperVector] = field(default_factory=dict)
    _matrix: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidDimensionError(f"dim must be >= 1, got {self.dim}")
        self.repr = Repr(self.repr)
        for sym, hv in self.entries.items():
            if hv.dim != self.dim or hv.repr is not self.repr:
                raise ShapeError(f"entry {sym!r} does not match codebook dim/repr")

    @classmethod
    def generate(
        cls,
        name: str,
        symbols: Iterable[str],
        seed: int = 0,
        dim: int = DEFAULT_DIM,
        repr: Repr = Repr.BINARY,
    ) -> Codebook:
        cb = cls(name, dim, seed, repr)
        for s in symbols:
            cb.add(s)
        return cb

    @classmethod
    def from_vectors(cls, name: str, vectors: Mapping[str, HyperVector], seed: int = 0) -> Codebook:
        vectors = dict(vectors)
        if not vectors:
            raise InvalidDimensionError("cannot infer dim of an empty codebook")
        first = next(iter(vectors.values()))
        return cls(name, first.dim, seed, first.repr, vectors)

    def add(self, symbol: str) -> HyperVector:
        symbol = str(symbol)
        if symbol not in self.entries:
            self.entries[symbol] = random_hv(self.name, symbol, self.seed, self.dim, self.repr)
            self._matrix = None
        return self.entries[symbol]

    def __getitem__(self, symbol: str) -> HyperVector:
        try:
            return self.entries[str(symbol)]
        except KeyError:
            raise MissingItemError(f"{symbol!r} not in codebook {self.name!r}") from None

    def __contains__(self, symbol: object) -> bool:
        return str(symbol) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    @property
    def symbols(self) -> list[str]:
        return list(self.entries)

    def matrix(self) -> np.ndarray:
        """M x D matrix of bipolar views, cached until the next ``add``."""
        if self._matrix is None:
            if not self.entries:
                self._matrix = np.zeros((0, self.dim), dtype=np.int8)
            else:
                self._matrix = np.stack([hv.as_bipolar_array() for hv in self.entries.values()])
            self._matrix.setflags(write=False)
        return self._matrix

    def similarities(self, v: HyperVector | np.ndarray, metric: Metric = Metric.COSINE) -> np.ndarray:
        """Similarity of ``v`` to every entry, higher-is-more-similar."""
        x = v.as_bipolar_array() if isinstance(v, HyperVector) else np.asarray(v)
        if x.shape[-1] != self.dim:
            raise ShapeError(f"query dim {x.shape[-1]} vs codebook dim {self.dim}")
        dots = self.matrix().astype(np.int64) @ x.astype(np.int64) if np.issubdtype(x.dtype, np.integer) \
            else self.matrix() @ x
        metric = Metric(metric)
        if metric is Metric.DOT:
            return dots.astype(float)
        norm = float(np.sqrt(np.dot(x.astype(float), x.astype(float))))
        if norm == 0.0:
            raise UndefinedSimilarityError("cosine similarity of a zero-norm vector")
        cos = dots / (np.sqrt(self.dim) * norm)
        if metric is Metric.HAMMING:
            return (1.0 + cos) / 2.0  # 1 - normalized Hamming for +-1 vectors
        return cos

    def nearest(self, v: HyperVector | np.ndarray, metric: Metric = Metric.COSINE) -> tuple[str, float]:
        if not self.entries:
            raise MissingItemError(f"codebook {self.name!r} is empty")
        sims = self.similarities(v, metric)
        i = int(np.argmax(sims))
        return self.symbols[i], float(sims[i])
