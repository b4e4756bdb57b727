"""Analytical memory-footprint bounds per workload category.

A footprint counts item memories (encoding), model storage (class, cluster,
program, codebook or reference vectors) and working buffers, in bytes of
storage cells. The lower bound takes binary vectors, random-projection
encoding, the smallest dataset scale and 3-bit cells; the upper bound takes
4-bit vectors, n-gram encoding, the largest scale and 1-bit cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from ..errors import InvalidDescriptorError

NGRAM_N = 3
BUFFER_LINES = 2


class Category(str, Enum):
    CLASSIFICATION = "Classification"
    CLUSTERING = "Clustering"
    OUTLIER_DETECTION = "OutlierDetection"
    GENOMICS = "Genomics"
    FACTORIZATION = "Factorization"
    ROBOTIC_REASONING = "RoboticReasoning"
    MULTIMODAL_PERCEPTION = "MultiModalPerception"


class EncodingKind(str, Enum):
    RANDOM_PROJECTION = "RandomProjection"
    NGRAM = "NGram"


@dataclass(frozen=True)
class WorkloadDescriptor:
    """``features`` is the input width (RP) or alphabet size (n-gram); ``classes`` the number of stored
    model vectors per unit (classes, clusters, actuator values, items per codebook); ``samples`` counts
    stored reference vectors where the category keeps them (genomics)."""

    category: Category
    D: int = 10_000
    bit_width: int = 1
    encoding: EncodingKind = EncodingKind.RANDOM_PROJECTION
    classes: int = 2
    features: int = 4
    sample_length: int = 4
    samples: int = 1
    bits_per_cell: int = 1
    factors: int = 1

    def __post_init__(self):
        try:
            object.__setattr__(self, "category", Category(self.category))
            object.__setattr__(self, "encoding", EncodingKind(self.encoding))
        except ValueError as e:
            raise InvalidDescriptorError(str(e)) from None
        if self.bit_width not in (1, 4):
            raise InvalidDescriptorError(f"bit width must be 1 or 4, got {self.bit_width}")
        if self.bits_per_cell not in (1, 3):
            raise InvalidDescriptorError(f"bits per cell must be 1 or 3, got {self.bits_per_cell}")
        if min(self.D, self.classes, self.features, self.sample_length, self.samples, self.factors) < 1:
            raise InvalidDescriptorError("D and dataset scales must be >= 1")
        if self.encoding is EncodingKind.NGRAM and self.sample_length < NGRAM_N:
            raise InvalidDescriptorError(f"n-gram encoding needs sample_length >= {NGRAM_N}")


# (min, max) dataset scale per category
SCALES = {
    Category.CLASSIFICATION: dict(classes=(2, 1000), features=(4, 1000), sample_length=(4, 1000), samples=(1, 1)),
    Category.CLUSTERING: dict(classes=(2, 8), features=(2, 8), sample_length=(4, 64), samples=(1, 1)),
    Category.OUTLIER_DETECTION: dict(classes=(1, 100), features=(4, 1000), sample_length=(4, 1000),
                                     samples=(1, 1)),
    Category.GENOMICS: dict(classes=(1, 1), features=(4, 4), sample_length=(100, 1_000_000),
                            samples=(10, 200_000)),
    Category.FACTORIZATION: dict(classes=(4, 256), features=(2, 4), sample_length=(4, 4), samples=(1, 1),
                                 factors=(2, 4)),
    Category.ROBOTIC_REASONING: dict(classes=(2, 8), features=(2, 32), sample_length=(4, 64), samples=(1, 1)),
    Category.MULTIMODAL_PERCEPTION: dict(classes=(2, 100), features=(3, 100), sample_length=(4, 64),
                                         samples=(1, 1)),
}


def _vectors(wd: WorkloadDescriptor) -> tuple[int, int]:
    """(vectors stored at full bit width, binary projection rows)."""
    if wd.encoding is EncodingKind.RANDOM_PROJECTION:
        enc, proj = 0, wd.features  # the +-1 projection matrix is 1 bit per entry
    else:
        enc, proj = wd.features + NGRAM_N, 0  # item memory plus n-gram window
    c = wd.category
    if c in (Category.CLASSIFICATION, Category.CLUSTERING, Category.OUTLIER_DETECTION):
        model = wd.classes
    elif c is Category.GENOMICS:
        model = wd.samples
    elif c is Category.FACTORIZATION:
        model = wd.factors * wd.classes + wd.factors + 1  # codebooks, estimates and the query
    elif c is Category.ROBOTIC_REASONING:
        model = wd.classes + 2  # actuator values, actuator id, program
    else:
        model = wd.classes + 1  # class vectors plus the fused query
    return enc + model + BUFFER_LINES, proj


def footprint_bits(wd: WorkloadDescriptor) -> int:
    full, proj = _vectors(wd)
    return wd.D * (full * wd.bit_width + proj)


def footprint_bytes(wd: WorkloadDescriptor) -> int:
    """Bytes of storage cells: ceil(bits / bits_per_cell) / 8."""
    return math.ceil(math.ceil(footprint_bits(wd) / wd.bits_per_cell) / 8)


def bound_descriptors(wd: WorkloadDescriptor) -> tuple[WorkloadDescriptor, WorkloadDescriptor]:
    scale = SCALES[wd.category]
    lo = {k: v[0] for k, v in scale.items()}
    hi = {k: v[1] for k, v in scale.items()}
    lower = replace(wd, bit_width=1, encoding=EncodingKind.RANDOM_PROJECTION, bits_per_cell=3, **lo)
    upper = replace(wd, bit_width=4, encoding=EncodingKind.NGRAM, bits_per_cell=1, **hi)
    return lower, upper


def footprint_bounds(wd: WorkloadDescriptor) -> tuple[int, int]:
    """(lower, upper) footprint in bytes for the descriptor's category and D."""
    lower, upper = bound_descriptors(wd)
    return footprint_bytes(lower), footprint_bytes(upper)


def bounds_table(D: int = 10_000) -> list[dict]:
    rows = []
    for cat in Category:
        lo, hi = footprint_bounds(WorkloadDescriptor(cat, D))
        rows.append({"category": cat.value, "D": D, "lower_bytes": lo, "upper_bytes": hi})
    return rows
