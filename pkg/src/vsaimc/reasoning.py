"""Rule-based querying with a clean-up memory, and resonator-network factorization.

The resonator works on bipolar estimates. Binding in the bipolar domain is
the elementwise product; for binary (XOR) codebooks the composite picks up a
sign of (-1)^(F-1) under the 0 -> -1 mapping, which is undone before
unbinding so both representations share one update rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidHyperparameterError, InvalidMemoryError, ShapeError
from .hdvec import (
    Codebook,
    HyperVector,
    Metric,
    Repr,
    bind,
    binarize_array,
    bundle,
    derive_seed,
    flip_mask,
    random_hv,
    similarity,
    unbind,
)


class Schedule(str, Enum):
    PARALLEL = "parallel"
    SEQUENTIAL = "sequential"


def compose(factors: Sequence[HyperVector]) -> HyperVector:
    """Left fold of bind over two or more factors."""
    factors = list(factors)
    if len(factors) < 2:
        raise ShapeError(f"compose needs at least 2 factors, got {len(factors)}")
    return reduce(bind, factors)


def make_record(roles: Codebook, fillers: Codebook, pairs: Mapping[str, str],
                tie_break_seed: int = 0) -> HyperVector:
    """Bundle of role (x) filler pairs, e.g. {"name": "USA", "cur": "DOL"}.

    Even-sized bundles need tie bits. They are keyed by the record contents
    as well as ``tie_break_seed``: two records sharing one tie stream would be
    correlated, and unbinding one with the other would echo the key back.
    """
    bound = [bind(roles[r], fillers[f]) for r, f in pairs.items()]
    if len(bound) == 1:
        return bound[0]
    seed = derive_seed("record", tie_break_seed, tuple(sorted(pairs.items())))
    return bundle(bound, seed)[1]


# ── clean-up memory ─────────────────────────────────────────────────────


@dataclass
class CleanupMemory:
    """Snaps a noisy vector to its most similar stored item.

    ``threshold`` is on the ranking scale (cosine, or 1 - normalized Hamming);
    below it the result is an explicit no-match ``(None, score)``.
    """

    codebook: Codebook
    metric: Metric = Metric.COSINE
    threshold: float = 0.1

    def __post_init__(self):
        self.metric = Metric(self.metric)
        if len(self.codebook) == 0:
            raise InvalidMemoryError(f"clean-up codebook {self.codebook.name!r} is empty")

    def ranked(self, v: HyperVector) -> list[tuple[str, float]]:
        sims = self.codebook.similarities(v, self.metric)
        order = np.argsort(-sims, kind="stable")
        syms = self.codebook.symbols
        return [(syms[i], float(sims[i])) for i in order]

    def cleanup(self, v: HyperVector) -> tuple[str | None, float]:
        if len(self.codebook) == 0:
            raise InvalidMemoryError(f"clean-up codebook {self.codebook.name!r} is empty")
        sym, score = self.codebook.nearest(v, self.metric)
        if score < self.threshold:
            return None, score
        return sym, score


def query_unbind(composite: HyperVector, key: HyperVector, cleanup: CleanupMemory) -> tuple[str | None, float]:
    """Unbind ``key`` from ``composite`` and clean up the (noisy) result."""
    return cleanup.cleanup(unbind(composite, key))


# ── resonator network ───────────────────────────────────────────────────


@dataclass(frozen=True)
class ResonatorState:
    estimates: tuple[HyperVector, ...]  # bipolar, one per codebook
    iteration: int = 0
    converged: tuple[bool, ...] = ()
    schedule: Schedule = Schedule.PARALLEL
    noise_p: float = 0.0
    seed: int = 0
    clean: tuple[HyperVector, ...] = ()  # sign outputs before noise injection

    def arrays(self) -> list[np.ndarray]:
        return [e.data for e in self.estimates]


def _check_codebooks(codebooks: Sequence[Codebook], dim: int) -> None:
    if not codebooks:
        raise ShapeError("at least one codebook is required")
    for cb in codebooks:
        if cb.dim != dim:
            raise ShapeError(f"codebook {cb.name!r} has dim {cb.dim}, expected {dim}")
        if len(cb) == 0:
            raise InvalidMemoryError(f"codebook {cb.name!r} is empty")
        if cb.repr is Repr.INT:
            raise ShapeError("resonator codebooks must be binary or bipolar")


def _composite_bipolar(f: HyperVector, codebooks: Sequence[Codebook]) -> np.ndarray:
    x = f.as_bipolar_array().astype(np.int64)
    n_xor = len(codebooks) - 1
    if codebooks[0].repr is Repr.BINARY and n_xor % 2:
        x = -x
    return x


def _project(cb: Codebook, v: np.ndarray, seed: int, factor: int) -> np.ndarray:
    """sign(X^T (X v)) with zeros resolved by a per-factor tie stream.

    The tie stream does not change between iterations, so the noise-free
    update is a fixed map of the state and its cycles are exact.
    """
    X = cb.matrix().astype(np.int64)
    s = X @ v
    y = X.T @ s
    return binarize_array(y, derive_seed("resonator-tie", seed, factor))


def init_state(codebooks: Sequence[Codebook], schedule: Schedule = Schedule.PARALLEL,
               noise_p: float = 0.0, seed: int = 0) -> ResonatorState:
    """Each estimate starts as the superposition of its whole codebook."""
    ests = []
    for i, cb in enumerate(codebooks):
        acc = cb.matrix().astype(np.int64).sum(axis=0)
        ests.append(HyperVector(binarize_array(acc, derive_seed("resonator-init", seed, i)), Repr.BIPOLAR))
    ests = tuple(ests)
    return ResonatorState(ests, 0, (False,) * len(ests), Schedule(schedule), float(noise_p), int(seed), ests)


def resonator_step(state: ResonatorState, f: HyperVector, codebooks: Sequence[Codebook]) -> ResonatorState:
    _check_codebooks(codebooks, f.dim)
    if len(state.estimates) != len(codebooks):
        raise ShapeError("one estimate per codebook is required")
    fb = _composite_bipolar(f, codebooks)
    prev = state.arrays()
    cur = list(prev)
    clean, noisy = [], []
    t = state.iteration
    for i, cb in enumerate(codebooks):
        src = cur if state.schedule is Schedule.SEQUENTIAL else prev
        v = fb.copy()
        for j, e in enumerate(src):
            if j != i:
                v *= e
        g = _project(cb, v, state.seed, i)
        clean.append(g)
        if state.noise_p > 0:
            g = np.where(flip_mask(state.noise_p, state.seed, f.dim, "resonator", t, i), -g, g).astype(np.int8)
        noisy.append(g)
        if state.schedule is Schedule.SEQUENTIAL:
            cur[i] = g
    prev_clean = [c.data for c in state.clean] if state.clean else prev
    converged = tuple(bool(np.array_equal(a, b)) for a, b in zip(clean, prev_clean))
    return ResonatorState(
        tuple(HyperVector(g, Repr.BIPOLAR) for g in noisy),
        t + 1,
        converged,
        state.schedule,
        state.noise_p,
        state.seed,
        tuple(HyperVector(g, Repr.BIPOLAR) for g in clean),
    )


@dataclass
class Factorization:
    factors: list[str]
    iterations: int
    converged: bool
    scores: list[float] = field(default_factory=list)  # cosine of each estimate to its decoded item
    final_similarity: float = 0.0  # cosine of compose(decoded) with f
    state: ResonatorState | None = None

    def as_tuple(self) -> tuple[list[str], int, bool]:
        return self.factors, self.iterations, self.converged

    def flagged(self, threshold: float = 0.5) -> bool:
        """True when the answer should not be trusted."""
        return not self.converged or self.final_similarity < threshold


def decode(state: ResonatorState, codebooks: Sequence[Codebook]) -> tuple[list[str], list[float]]:
    """Nearest item per factor by |cosine|.

    Negating an even number of estimates leaves the product unchanged, so
    (-a, -b, c) is as valid a fixed point as (a, b, c); the magnitude picks
    the same items either way. Scores keep their sign.
    """
    syms, scores = [], []
    for est, cb in zip(state.clean or state.estimates, codebooks):
        sims = cb.similarities(est)
        i = int(np.argmax(np.abs(sims)))
        syms.append(cb.symbols[i])
        scores.append(float(sims[i]))
    return syms, scores


def factorize(f: HyperVector, codebooks: Sequence[Codebook], max_iters: int = 100,
              schedule: Schedule = Schedule.PARALLEL, noise_p: float = 0.0, seed: int = 0) -> Factorization:
    """Iterate resonator steps until every estimate repeats exactly, or ``max_iters``.

    Non-convergence is reported through ``converged=False`` with a best-effort decode.
    """
    if max_iters < 1:
        raise InvalidHyperparameterError(f"max_iters must be >= 1, got {max_iters}")
    _check_codebooks(codebooks, f.dim)
    state = init_state(codebooks, schedule, noise_p, seed)
    for _ in range(max_iters):
        state = resonator_step(state, f, codebooks)
        if all(state.converged):
            break
    syms, scores = decode(state, codebooks)
    recomposed = compose([cb[s] for cb, s in zip(codebooks, syms)]) if len(codebooks) > 1 else codebooks[0][syms[0]]
    final = similarity(recomposed, f.to_repr(recomposed.repr)).value
    return Factorization(syms, state.iteration, all(state.converged), scores, final, state)


def limit_cycle_period(f: HyperVector, codebooks: Sequence[Codebook], max_iters: int = 200,
                       schedule: Schedule = Schedule.PARALLEL, seed: int = 0) -> int | None:
    """Period (> 1) of a noise-free orbit that revisits a state without settling, else None."""
    state = init_state(codebooks, schedule, 0.0, seed)
    seen: dict[bytes, int] = {}
    for t in range(max_iters):
        key = b"".join(e.data.tobytes() for e in state.estimates)
        if key in seen:
            period = t - seen[key]
            return period if period > 1 else None
        seen[key] = t
        state = resonator_step(state, f, codebooks)
        if all(state.converged):
            return None
    return None


def random_problem(n_factors: int, n_items: int, dim: int, seed: int,
                   repr: Repr = Repr.BIPOLAR) -> tuple[list[Codebook], list[str], HyperVector]:
    """Seeded codebooks plus a composite of one randomly chosen item per codebook."""
    books = [Codebook.generate(f"factor{i}", [f"x{i}_{k}" for k in range(n_items)], seed, dim, repr)
             for i in range(n_factors)]
    rng = np.random.Generator(np.random.Philox(key=derive_seed("problem", seed, n_factors, n_items, dim)))
    truth = [cb.symbols[int(rng.integers(n_items))] for cb in books]
    f = compose([cb[s] for cb, s in zip(books, truth)]) if n_factors > 1 else books[0][truth[0]]
    return books, truth, f


def brute_force_factors(f: HyperVector, codebooks: Sequence[Codebook]) -> tuple[list[str], float]:
    """Exhaustive search for the combination whose composite is most similar to ``f``."""
    fb = _composite_bipolar(f, codebooks)
    mats = [cb.matrix().astype(np.int64) for cb in codebooks]
    best, best_idx = -np.inf, None
    for idx in np.ndindex(*[len(m) for m in mats]):
        prod = fb.copy()
        for m, k in zip(mats, idx):
            prod *= m[k]
        score = prod.sum()
        if score > best:
            best, best_idx = score, idx
    syms = [cb.symbols[k] for cb, k in zip(codebooks, best_idx)]
    return syms, float(best) / f.dim


def unrelated_vector(dim: int, seed: int, repr: Repr = Repr.BIPOLAR) -> HyperVector:
    return random_hv("unrelated", "f", seed, dim, repr)
