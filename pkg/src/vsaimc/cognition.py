"""Cognition pipelines: graph memory, reactive navigation and HDFF-style
out-of-distribution scoring."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb, sqrt
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .encoders import LevelEmbedding
from .errors import InvalidGraphError, MissingItemError, ModelStateError, ShapeError
from .hdvec import (
    DEFAULT_DIM,
    Codebook,
    HyperVector,
    Repr,
    bind,
    binarize_array,
    bundle,
    derive_seed,
    rng_for,
    similarity,
    unbind,
)

CLEANUP_THRESHOLD = 0.25


def member_cosine(n: int) -> float:
    """Expected cosine between a majority bundle of n random vectors and one member.

    Ties (even n) are broken by a fair coin. n = 1 gives 1.0, n = 2 gives 0.5.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return comb(n - 1, (n - 1) // 2) / 2.0 ** (n - 1)


def noise_floor(dim: int) -> float:
    """Three standard deviations of the cosine between unrelated random vectors."""
    return 3.0 / sqrt(dim)


# ── graph memory ────────────────────────────────────────────────────────


@dataclass
class GraphMemory:
    nodes: list  # node ids, in codebook order
    H: Codebook
    M: np.ndarray  # V x D int64 neighbour accumulators (bipolar sums)
    M_bin: np.ndarray  # V x D +-1
    G: HyperVector
    n_edges: int
    compose: str = "bind"
    seed: int = 0
    degrees: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def _index(self) -> dict:
        return {n: i for i, n in enumerate(self.nodes)}

    def index(self, node) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise MissingItemError(f"node {node!r} is not in the graph") from None

    def degree(self, node) -> int:
        return int(self.degrees[self.index(node)])

    def node_vector(self, node) -> HyperVector:
        return self.H[str(node)]

    def memory(self, node) -> HyperVector:
        """Binarized neighbour memory of ``node`` as a binary vector."""
        return HyperVector(((self.M_bin[self.index(node)] + 1) // 2).astype(np.int8), Repr.BINARY)

    def memory_from_graph(self, node) -> HyperVector:
        """Noisy neighbour memory recovered from G alone by unbinding H_node."""
        if self.compose != "bind":
            return self.G
        # G holds bipolar products, so unbind in the bipolar domain
        prod = self.G.as_bipolar_array() * self.node_vector(node).as_bipolar_array()
        return HyperVector(prod, Repr.BIPOLAR)


def _normalize_edges(edges, dedupe: bool) -> list[tuple]:
    seen, out = set(), []
    for e in edges:
        if len(e) != 2:
            raise InvalidGraphError(f"edge {e!r} does not have two endpoints")
        a, b = e
        if a == b:
            if dedupe:
                continue
            raise InvalidGraphError(f"self-loop on node {a!r}")
        key = frozenset((a, b))
        if key in seen:
            if dedupe:
                continue
            raise InvalidGraphError(f"duplicate edge {a!r}-{b!r}")
        seen.add(key)
        out.append((a, b))
    return out


def graph_encode(edges: Iterable[tuple[Hashable, Hashable]], seed: int = 0, dim: int = DEFAULT_DIM,
                 nodes: Sequence | None = None, compose: str = "bind", dedupe: bool = False) -> GraphMemory:
    """Node memories M_i = sum of neighbour vectors; G = bundle_i (H_i op binarized M_i).

    ``compose="bind"`` pairs each node with its memory by binding, which lets
    edges be recovered from G by unbinding. ``compose="bundle"`` superposes
    node and memory vectors instead.
    """
    if compose not in ("bind", "bundle"):
        raise ValueError(f"compose must be 'bind' or 'bundle', got {compose!r}")
    edges = _normalize_edges(edges, dedupe)
    found = {n for e in edges for n in e}
    if nodes is None:
        nodes = sorted(found, key=lambda n: (str(type(n)), n))
    else:
        nodes = list(nodes)
        missing = found - set(nodes)
        if missing:
            raise InvalidGraphError(f"edges reference unknown nodes {sorted(map(str, missing))}")
    if not nodes:
        raise InvalidGraphError("graph must have at least one node")
    H = Codebook.generate("graph-nodes", [str(n) for n in nodes], seed, dim)
    idx = {n: i for i, n in enumerate(nodes)}
    X = H.matrix().astype(np.int64)
    M = np.zeros((len(nodes), dim), dtype=np.int64)
    deg = np.zeros(len(nodes), dtype=np.int64)
    for a, b in edges:
        M[idx[a]] += X[idx[b]]
        M[idx[b]] += X[idx[a]]
        deg[idx[a]] += 1
        deg[idx[b]] += 1
    # independent tie streams per node so even-degree memories stay uncorrelated
    M_bin = np.stack([binarize_array(M[i], derive_seed("graph-node", seed, i)) for i in range(len(nodes))])
    if compose == "bind":
        parts = X * M_bin
    else:
        parts = np.concatenate([X, M_bin])
    G = binarize_array(parts.sum(axis=0), derive_seed("graph", seed))
    return GraphMemory(nodes, H, M, M_bin, HyperVector(((G + 1) // 2).astype(np.int8), Repr.BINARY),
                       len(edges), compose, seed, deg)


def edge_threshold(gm: GraphMemory, i, j, directed: bool = False) -> float:
    """Halfway between the noise floor and the expected score of a true edge.

    A true neighbour of a node with degree d scores about member_cosine(d).
    """
    def expected(node) -> float:
        d = gm.degree(node)
        return member_cosine(d) if d else 1.0

    exp = expected(i) if directed else 0.5 * (expected(i) + expected(j))
    return 0.5 * (noise_floor(gm.G.dim) + exp)


def graph_edge_query(gm: GraphMemory, i, j, threshold: float | None = None,
                     directed: bool = False, source: str = "memory") -> tuple[bool, float]:
    """Cosine of node i's memory with H_j; symmetric (mean of both directions) unless ``directed``.

    ``source="graph"`` reads memories back out of G instead of the stored M_i.
    ``threshold=None`` calibrates the decision from the two node degrees.
    """
    def one(a, b) -> float:
        mem = gm.memory(a) if source == "memory" else gm.memory_from_graph(a)
        return similarity(mem, gm.node_vector(b)).value

    gm.index(i), gm.index(j)
    score = one(i, j) if directed else 0.5 * (one(i, j) + one(j, i))
    if threshold is None:
        threshold = edge_threshold(gm, i, j, directed)
    return score >= threshold, score


def edge_scores(gm: GraphMemory, directed: bool = False) -> np.ndarray:
    """V x V matrix of edge-query scores (diagonal included)."""
    S = gm.M_bin.astype(np.int64) @ gm.H.matrix().T.astype(np.int64) / gm.G.dim
    return S if directed else 0.5 * (S + S.T)


# ── reactive navigation ─────────────────────────────────────────────────


def rank_auc(labels, scores) -> float:
    """Area under the ROC curve via the rank-sum statistic (ties count one half)."""
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=float)
    pos, neg = scores[labels], scores[~labels]
    if not len(pos) or not len(neg):
        raise ValueError("AUC needs both positive and negative examples")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (len(pos) * len(neg)))


@dataclass
class Demo:
    sensors: Mapping[str, float | str]
    actuators: Mapping[str, str]


@dataclass
class NavigationProgram:
    sensor_ids: Codebook
    actuator_ids: Codebook
    action_values: dict[str, Codebook]  # actuator -> clean-up codebook of its legal outputs
    levels: LevelEmbedding
    sensor_values: Codebook  # item vectors for categorical readings
    accum: np.ndarray | None = None  # D int64
    program: HyperVector | None = None
    n_trained: int = 0
    seed: int = 0
    threshold: float | None = None  # None: calibrated from n_trained and dim

    @property
    def dim(self) -> int:
        return self.sensor_ids.dim

    def recall_threshold(self) -> float:
        """Halfway between the random noise floor and the expected score of a trained demo."""
        if self.threshold is not None:
            return self.threshold
        if self.n_trained == 0:
            return CLEANUP_THRESHOLD
        return 0.5 * (noise_floor(self.dim) + member_cosine(self.n_trained))

    def accepts(self, score: float) -> bool:
        return score >= self.recall_threshold()

    def _value_hv(self, value) -> HyperVector:
        if isinstance(value, str):
            return self.sensor_values.add(value)
        return self.levels.encode(float(value))

    def encode_sensors(self, readings: Mapping[str, float | str]) -> HyperVector:
        """bundle over sensors of bind(sensor id, value vector)."""
        if not readings:
            raise ShapeError("a reading needs at least one sensor")
        pairs = [bind(self.sensor_ids[s], self._value_hv(v)) for s, v in sorted(readings.items())]
        if len(pairs) == 1:
            return pairs[0]
        return bundle(pairs, derive_seed("nav-sensors", self.seed, tuple(sorted(readings.items()))))[1]

    def encode_actuators(self, outputs: Mapping[str, str]) -> HyperVector:
        if not outputs:
            raise ShapeError("a demo needs at least one actuator output")
        pairs = []
        for a, v in sorted(outputs.items()):
            if a not in self.action_values:
                raise MissingItemError(f"actuator {a!r} is not registered")
            pairs.append(bind(self.actuator_ids[a], self.action_values[a][v]))
        if len(pairs) == 1:
            return pairs[0]
        return bundle(pairs, derive_seed("nav-actuators", self.seed, tuple(sorted(outputs.items()))))[1]


def make_navigation_program(sensors: Iterable[str], actions: Mapping[str, Iterable[str]], dim: int = DEFAULT_DIM,
                            seed: int = 0, low: float = 0.0, high: float = 1.0, levels: int = 16,
                            threshold: float | None = None) -> NavigationProgram:
    """Empty program with registered sensor ids and per-actuator legal outputs."""
    return NavigationProgram(
        Codebook.generate("nav-sensor-ids", list(sensors), seed, dim),
        Codebook.generate("nav-actuator-ids", list(actions), seed, dim),
        {a: Codebook.generate(f"nav-values/{a}", list(vs), seed, dim) for a, vs in actions.items()},
        LevelEmbedding(low, high, levels, dim, seed, name="nav-levels"),
        Codebook("nav-sensor-values", dim, seed),
        seed=seed,
        threshold=threshold,
    )


def navigation_train(demos: Sequence[Demo], prog: NavigationProgram) -> NavigationProgram:
    """Program = bundle over demos of bind(sensor vector, actuator vector).

    Accumulates into ``prog`` so training can continue with more demos.
    """
    if not demos:
        raise ShapeError("at least one demo is required")
    acc = np.zeros(prog.dim, dtype=np.int64) if prog.accum is None else prog.accum.copy()
    for d in demos:
        pair = bind(prog.encode_sensors(d.sensors), prog.encode_actuators(d.actuators))
        acc += pair.as_bipolar_array()
    prog.accum = acc
    prog.n_trained += len(demos)
    bits = binarize_array(acc, derive_seed("nav-program", prog.seed))
    prog.program = HyperVector(((bits + 1) // 2).astype(np.int8), Repr.BINARY)
    return prog


def navigation_recall_hv(prog: NavigationProgram, query: HyperVector) -> list[tuple[str, str, float]]:
    """Recall from an already encoded sensor vector."""
    if prog.program is None or prog.n_trained == 0:
        raise ModelStateError("navigation program has not been trained")
    noisy = bind(query.to_binary(), prog.program)
    out = []
    for a, values in prog.action_values.items():
        v, score = values.nearest(unbind(noisy, prog.actuator_ids[a]))
        out.append((a, v, score))
    return out


def navigation_recall(prog: NavigationProgram, readings: Mapping[str, float | str]) -> list[tuple[str, str, float]]:
    """Per actuator: (actuator id, best value, cosine score)."""
    if prog.program is None or prog.n_trained == 0:
        raise ModelStateError("navigation program has not been trained")
    return navigation_recall_hv(prog, prog.encode_sensors(readings))


GRID_SENSORS = ("range_n", "range_e", "range_s", "range_w", "goal_dx", "goal_dy")
GRID_MOVES = ("N", "E", "S", "W")
_STEP = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}


def _free_run(grid: np.ndarray, pos, move: str) -> int:
    """Free cells from ``pos`` in direction ``move`` before a wall or the border."""
    (x, y), (dx, dy), n = pos, _STEP[move], 0
    while True:
        x, y = x + dx, y + dy
        if not (0 <= x < grid.shape[0] and 0 <= y < grid.shape[1]) or grid[x, y]:
            return n
        n += 1


def grid_expert(pos, goal, blocked: set) -> str:
    """Greedy move toward ``goal`` on the larger offset axis, avoiding blocked moves."""
    dx, dy = goal[0] - pos[0], goal[1] - pos[1]
    horiz = "E" if dx > 0 else "W"
    vert = "N" if dy > 0 else "S"
    if abs(dx) >= abs(dy):
        prefs = [horiz, vert] if dy else [horiz]
    else:
        prefs = [vert, horiz] if dx else [vert]
    prefs += [m for m in GRID_MOVES if m not in prefs]
    for m in prefs:
        if m not in blocked:
            return m
    return prefs[0]


def grid_demos(n_demos: int = 20, size: int = 16, seed: int = 0, wall_density: float = 0.2) -> list[Demo]:
    """Distinct expert demonstrations on a seeded ``size`` x ``size`` obstacle map.

    Readings are discrete (range counts, goal offsets) and reported as strings,
    so each distinct reading gets its own item vector.
    """
    gen = rng_for("grid-demos", seed, size)
    grid = gen.random((size, size)) < wall_density
    free = np.argwhere(~grid)
    demos, seen = [], set()
    while len(demos) < n_demos:
        pos, goal = (tuple(int(v) for v in free[gen.integers(len(free))]) for _ in range(2))
        if pos == goal:
            continue
        ranges = {m: _free_run(grid, pos, m) for m in GRID_MOVES}
        blocked = {m for m, r in ranges.items() if r == 0}
        if len(blocked) == 4:
            continue
        sensors = {f"range_{m.lower()}": str(r) for m, r in ranges.items()}
        sensors["goal_dx"] = str(goal[0] - pos[0])
        sensors["goal_dy"] = str(goal[1] - pos[1])
        key = tuple(sorted(sensors.items()))
        if key in seen:
            continue
        seen.add(key)
        demos.append(Demo(sensors, {"move": grid_expert(pos, goal, blocked)}))
    return demos


def grid_program(dim: int = DEFAULT_DIM, seed: int = 0) -> NavigationProgram:
    return make_navigation_program(GRID_SENSORS, {"move": GRID_MOVES}, dim, seed)


# ── HDFF out-of-distribution scoring ────────────────────────────────────


def semi_orthogonal(n_in: int, dim: int, seed: int, layer: int) -> np.ndarray:
    """n_in x dim matrix with orthonormal rows (or columns when n_in > dim)."""
    gen = rng_for("hdff-projection", seed, layer, n_in, dim)
    A = gen.standard_normal((max(n_in, dim), min(n_in, dim)))
    Q, R = np.linalg.qr(A)
    Q *= np.sign(np.diag(R))  # unique QR
    return Q.T if n_in <= dim else Q


@dataclass
class HdffDescriptor:
    layer_dims: list[int]
    dim: int = DEFAULT_DIM
    seed: int = 0
    combine: str = "bundle"
    threshold: float = CLEANUP_THRESHOLD
    centers: list[np.ndarray] | None = None  # per-layer feature means subtracted before projection
    classes: list = field(default_factory=list)
    reps: np.ndarray | None = None  # k x D +-1 class representatives

    def __post_init__(self):
        if self.combine not in ("bundle", "bind"):
            raise ValueError(f"combine must be 'bundle' or 'bind', got {self.combine!r}")
        if not self.layer_dims:
            raise ShapeError("at least one layer is required")

    @property
    def n_layers(self) -> int:
        return len(self.layer_dims)

    @cached_property
    def projections(self) -> list[np.ndarray]:
        return [semi_orthogonal(n, self.dim, self.seed, i) for i, n in enumerate(self.layer_dims)]

    def _layers(self, layer_features) -> list[np.ndarray]:
        feats = [np.atleast_2d(np.asarray(f, dtype=float)) for f in layer_features]
        if len(feats) != self.n_layers:
            raise ShapeError(f"expected {self.n_layers} layers, got {len(feats)}")
        for i, (f, n) in enumerate(zip(feats, self.layer_dims)):
            if f.shape[1] != n:
                raise ShapeError(f"layer {i} has {f.shape[1]} features, expected {n}")
        return feats

    def project(self, layer_features) -> list[np.ndarray]:
        """Per layer: n x D real projections (an isometry when n_in <= D)."""
        out = []
        for i, (f, P) in enumerate(zip(self._layers(layer_features), self.projections)):
            if self.centers is not None:
                f = f - self.centers[i]
            out.append(f @ P)
        return out

    def layer_vectors(self, layer_features) -> list[np.ndarray]:
        """Per layer: n x D +-1 quantized projections."""
        return [binarize_array(z, derive_seed("hdff-tie", self.seed, i))
                for i, z in enumerate(self.project(layer_features))]

    def describe(self, layer_features) -> np.ndarray:
        """n x D +-1 descriptor y combining all layers."""
        hs = self.layer_vectors(layer_features)
        if len(hs) == 1:
            return hs[0]
        if self.combine == "bind":
            return np.prod(np.stack(hs), axis=0).astype(np.int8)
        return binarize_array(np.sum(np.stack(hs).astype(np.int64), axis=0), derive_seed("hdff-combine", self.seed))


def hdff_fit(layer_features, labels, layer_dims: Sequence[int] | None = None, dim: int = DEFAULT_DIM,
             seed: int = 0, combine: str = "bundle", threshold: float = CLEANUP_THRESHOLD,
             center: bool = True) -> HdffDescriptor:
    """Class representatives = binarized bundle of in-distribution descriptors per class."""
    feats = [np.atleast_2d(np.asarray(f, dtype=float)) for f in layer_features]
    dims = list(layer_dims) if layer_dims is not None else [f.shape[1] for f in feats]
    desc = HdffDescriptor(dims, dim, seed, combine, threshold)
    if center:
        desc.centers = [f.mean(axis=0) for f in desc._layers(feats)]
    y = desc.describe(feats)
    labels = np.asarray(labels)
    if len(labels) != len(y):
        raise ShapeError("labels and samples differ in length")
    desc.classes = sorted(set(labels.tolist()))
    desc.reps = np.stack([
        binarize_array(y[labels == c].astype(np.int64).sum(axis=0), derive_seed("hdff-class", seed, str(c)))
        for c in desc.classes
    ])
    return desc


def hdff_scores(layer_features, desc: HdffDescriptor) -> tuple[np.ndarray, list]:
    """Batch form of ``hdff_score``: max cosine per sample and the nearest class."""
    if desc.reps is None:
        raise ModelStateError("descriptor has no class representatives; call hdff_fit")
    y = desc.describe(layer_features)
    sims = y.astype(np.int64) @ desc.reps.T.astype(np.int64) / desc.dim
    best = np.argmax(sims, axis=1)
    return sims[np.arange(len(y)), best], [desc.classes[i] for i in best]


def hdff_score(layer_features, desc: HdffDescriptor) -> tuple[float, object]:
    """(score, nearest class) for one sample given as one feature vector per layer."""
    scores, classes = hdff_scores([np.asarray(f, dtype=float)[None, :] for f in layer_features], desc)
    return float(scores[0]), classes[0]


def is_ood(score: float, desc: HdffDescriptor) -> bool:
    return score < desc.threshold
