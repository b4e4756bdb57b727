"""Hyperdimensional computing primitives, learning and reasoning pipelines, and an
in-memory-computing cost model for mapping them onto memory arrays."""

__version__ = "0.1.0"

from .hdvec import (
    Codebook,
    HyperVector,
    Metric,
    Repr,
    bind,
    bundle,
    hamming,
    permute,
    random_hv,
    similarity,
    unbind,
)

__all__ = [
    "__version__", "Codebook", "HyperVector", "Metric", "Repr",
    "bind", "bundle", "hamming", "permute", "random_hv", "similarity", "unbind",
]
