"""The traced pipelines, their core assignments, and trace generation.

Each workload runs its functional pipeline once (cached) and records the
data-dependent facts (resonator iterations, distinct readings, predictions).
The tracer then replays those facts against a mapping, so a trace depends
only on the workload parameters and the mapping.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from ..cognition import grid_demos, grid_program, navigation_recall, navigation_train
from ..encoders import LevelEmbedding, ModalRecord, ProjectionEncoder, build_id_codebook, multimodal_encode
from ..errors import MappingError
from ..hdvec import rng_for, similarity
from ..learning import predict, train_single_pass
from ..reasoning import Schedule, factorize, random_problem
from ..synthetic import make_blobs
from .arch import Architecture, CoreKind, Mapping, Role, make_core
from .trace import OpTrace, Tracer

S, D_ = CoreKind.STATIC, CoreKind.DYNAMIC


@dataclass(frozen=True)
class PerceptionWorkload:
    """Multi-modal classification: level-coded features bound to IDs, windowed, fused, searched."""

    modalities: tuple[tuple[str, int], ...] = (("imu", 6), ("eeg", 8), ("gyro", 3))
    n_classes: int = 4
    levels: int = 16
    window: int = 4
    n_samples: int = 500
    sample_interval: float = 1e-3  # s between sensor frames
    dim: int = 10_000
    seed: int = 0
    name: str = "perception"


@dataclass(frozen=True)
class NavigationWorkload:
    """Learning-from-demonstration on the grid workload; ``phase`` is "train" or "recall"."""

    n_demos: int = 200
    demo_interval: float = 5e-3  # s per control step
    n_queries: int = 200
    dim: int = 10_000
    seed: int = 0
    phase: str = "train"
    name: str = "navigation"


@dataclass(frozen=True)
class FactorizationWorkload:
    n_factors: int = 3
    n_items: int = 8
    n_queries: int = 200
    query_interval: float = 1e-3
    dim: int = 10_000
    max_iters: int = 100
    schedule: Schedule = Schedule.PARALLEL
    seed: int = 0
    name: str = "factorization"


@dataclass(frozen=True)
class ClassificationWorkload:
    """Random-projection encoding plus associative search (single-pass trained)."""

    n_features: int = 64
    n_classes: int = 4
    n_samples: int = 200
    sample_interval: float = 1e-3
    dim: int = 10_000
    seed: int = 0
    name: str = "classification"


Workload = Union[PerceptionWorkload, NavigationWorkload, FactorizationWorkload, ClassificationWorkload]


def default_workloads(dim: int = 10_000, seed: int = 0) -> list[Workload]:
    return [PerceptionWorkload(dim=dim, seed=seed), NavigationWorkload(dim=dim, seed=seed),
            FactorizationWorkload(dim=dim, seed=seed)]


# ── functional runs ─────────────────────────────────────────────────────


def _perception_sample(w: PerceptionWorkload, means: np.ndarray, label: int, gen) -> list[ModalRecord]:
    recs = []
    for t in range(w.window):
        col = 0
        for m, nf in w.modalities:
            vals = np.clip(means[label, col:col + nf] + gen.normal(0, 0.05, nf), 0, 1)
            recs.append(ModalRecord(m, {f"f{i}": float(v) for i, v in enumerate(vals)}, t))
            col += nf
    return recs


@lru_cache(maxsize=32)
def run_workload(w: Workload) -> dict:
    """Execute the functional pipeline; returns the facts the tracer needs."""
    if isinstance(w, PerceptionWorkload):
        mods = {m: [f"f{i}" for i in range(nf)] for m, nf in w.modalities}
        ids = build_id_codebook(mods, w.seed, w.dim)
        emb = LevelEmbedding(0.0, 1.0, w.levels, w.dim, w.seed)
        n_feat = sum(nf for _, nf in w.modalities)
        gen = rng_for("perception", w.seed)
        means = gen.random((w.n_classes, n_feat))
        protos = [multimodal_encode(_perception_sample(w, means, c, rng_for("proto", w.seed, c)), ids, emb, w.seed)
                  for c in range(w.n_classes)]
        labels = gen.integers(0, w.n_classes, w.n_samples)
        hits = 0
        for y in labels:
            q = multimodal_encode(_perception_sample(w, means, int(y), gen), ids, emb, w.seed)
            hits += int(np.argmax([similarity(q, p).value for p in protos])) == y
        return {"accuracy": hits / w.n_samples, "n_features": n_feat}
    if isinstance(w, NavigationWorkload):
        demos = grid_demos(w.n_demos, seed=w.seed)
        prog = navigation_train(demos, grid_program(w.dim, w.seed))
        n_q = min(w.n_queries, len(demos))
        hits = sum(navigation_recall(prog, d.sensors)[0][1] == d.actuators["move"] for d in demos[:n_q])
        return {"recall_accuracy": hits / n_q, "n_sensors": len(prog.sensor_ids),
                "n_values": len(prog.sensor_values), "n_actuators": len(prog.actuator_ids),
                "n_action_values": sum(len(v) for v in prog.action_values.values()), "n_recall": n_q}
    if isinstance(w, FactorizationWorkload):
        iters, correct = [], 0
        for q in range(w.n_queries):
            books, truth, f = random_problem(w.n_factors, w.n_items, w.dim, w.seed * 100_003 + q)
            res = factorize(f, books, w.max_iters, w.schedule, seed=q)
            iters.append(res.iterations)
            correct += res.factors == truth
        return {"iterations": tuple(iters), "accuracy": correct / w.n_queries}
    if isinstance(w, ClassificationWorkload):
        X, y = make_blobs(w.n_samples * 2, w.n_features, w.n_classes, seed=w.seed)
        enc = ProjectionEncoder(w.n_features, w.dim, w.seed)
        model = train_single_pass(X[: w.n_samples], y[: w.n_samples], enc)
        acc = float(np.mean(np.asarray(predict(model, X[w.n_samples:])) == y[w.n_samples:]))
        return {"accuracy": acc, "zero_fraction": float(np.mean(X == 0))}
    raise MappingError(f"unknown workload type {type(w).__name__}")


# ── core assignment ─────────────────────────────────────────────────────


def _mapping(w: Workload, arch: Architecture, cores: list[tuple]) -> Mapping:
    arch.check_roles(r for _, r, _, _ in cores)
    specs = tuple(make_core(arch, cid, role, kind, rows, w.dim) for cid, role, kind, rows in cores)
    return Mapping(w.name, arch, specs, w.dim)


def map_workload(w: Workload, arch: Architecture) -> Mapping:
    """Bind pipeline stages to static (fixed contents) and dynamic (rewritten) cores."""
    a = arch.accum_bits
    if isinstance(w, PerceptionWorkload):
        n_feat = sum(nf for _, nf in w.modalities)
        n_mod = len(w.modalities)
        max_f = max(nf for _, nf in w.modalities)
        return _mapping(w, arch, [
            ("value_embedding", Role.VALUE_EMBEDDING, S, w.levels),
            ("item_memory", Role.ITEM_MEMORY, S, n_feat),
            ("encoding", Role.ENCODING, D_, max_f + n_mod * a),
            ("classification", Role.CLASSIFICATION, S, w.n_classes),
        ])
    if isinstance(w, NavigationWorkload):
        info = run_workload(w)
        cores = [
            ("sensor", Role.SENSOR, S, info["n_sensors"]),
            ("sensor_values", Role.SENSOR_VALUES, S, info["n_values"]),
            ("actuator", Role.ACTUATOR, S, info["n_actuators"] + info["n_action_values"]),
            ("program", Role.PROGRAM, S, a),
            ("cleanup", Role.CLEANUP, S, info["n_action_values"]),
        ]
        if w.phase == "train":
            cores.insert(3, ("sap", Role.SAP, D_, 1 + a))
        elif w.phase != "recall":
            raise MappingError(f"navigation phase must be 'train' or 'recall', got {w.phase!r}")
        return _mapping(w, arch, cores)
    if isinstance(w, FactorizationWorkload):
        cores = [("disentangle", Role.DISENTANGLE, D_, w.n_factors + 1)]
        if Schedule(w.schedule) is Schedule.PARALLEL:
            for i in range(w.n_factors):
                cores += [(f"similarity{i}", Role.SIMILARITY, S, w.n_items),
                          (f"projection{i}", Role.PROJECTION, S, w.n_items)]
        else:
            cores += [("similarity", Role.SIMILARITY, D_, w.n_items), ("projection", Role.PROJECTION, D_, w.n_items)]
        return _mapping(w, arch, cores)
    if isinstance(w, ClassificationWorkload):
        return _mapping(w, arch, [
            ("projection_matrix", Role.PROJECTION_MATRIX, S, w.n_features),
            ("encoding", Role.ENCODING, D_, a),
            ("classification", Role.CLASSIFICATION, S, w.n_classes),
        ])
    raise MappingError(f"unknown workload type {type(w).__name__}")


# ── tracing ─────────────────────────────────────────────────────────────


def _program_static(tr: Tracer, mapping: Mapping, skip=()) -> None:
    tr.stage("program", offline=True)
    for c in mapping.static_cores:
        if c.id not in skip:
            tr.program(c.id)


def _trace_perception(w: PerceptionWorkload, m: Mapping, info: dict) -> OpTrace:
    tr, D, a = Tracer(m), w.dim, m.arch.accum_bits
    _program_static(tr, m)
    n_mod = len(w.modalities)
    for _ in range(w.n_samples):
        for _t in range(w.window):
            for _m, nf in w.modalities:
                tr.stage("embed")
                tr.read_rows("value_embedding", nf)
                tr.xor("item_memory", nf)
                tr.stage("bundle")
                tr.write_rows("encoding", nf)
                tr.mvm("encoding", nf)
                tr.periph("adder", D)
                tr.periph("shift", D)
                tr.write_rows("encoding", a)
        tr.stage("fuse")
        tr.read_rows("encoding", n_mod * a)
        tr.periph("threshold", n_mod * D)
        tr.periph("adder", n_mod * D)
        tr.periph("threshold", D)
        tr.periph("buffer_bits", D)
        tr.stage("classify")
        tr.mvm("classification")
        tr.periph("wta", w.n_classes)
    return tr.finish(w.n_samples * w.sample_interval, info)


def _nav_encode(tr: Tracer, n_sensors: int, D: int) -> None:
    tr.stage("sensor")
    tr.read_rows("sensor_values", n_sensors)
    tr.xor("sensor", n_sensors)
    tr.periph("adder", n_sensors * D)
    tr.periph("threshold", D)


def _trace_navigation(w: NavigationWorkload, m: Mapping, info: dict) -> OpTrace:
    tr, D, a = Tracer(m), w.dim, m.arch.accum_bits
    ns = info["n_sensors"]
    if w.phase == "train":
        _program_static(tr, m, skip=("program",))
        for _ in range(w.n_demos):
            _nav_encode(tr, ns, D)
            tr.stage("actuator")
            tr.read_rows("actuator", 2)  # actuator id and its value
            tr.periph("buffer_bits", D)
            tr.stage("sap")
            tr.write_rows("sap", 1)  # actuator vector in
            tr.xor("sap", 1)  # sensor vector streamed in
            tr.read_rows("sap", a)
            tr.periph("adder", D)
            tr.write_rows("sap", a)
        tr.stage("store")
        tr.read_rows("sap", a)
        tr.program("program")
        return tr.finish(w.n_demos * w.demo_interval, info)
    _program_static(tr, m)
    for _ in range(w.n_queries):
        _nav_encode(tr, ns, D)
        tr.stage("recall")
        tr.xor("program", 1)
        tr.xor("actuator", info["n_actuators"])
        tr.stage("cleanup")
        tr.mvm("cleanup")
        tr.periph("wta", info["n_action_values"])
    return tr.finish(w.n_queries * w.demo_interval, info)


def _trace_factorization(w: FactorizationWorkload, m: Mapping, info: dict) -> OpTrace:
    tr, D, F = Tracer(m), w.dim, w.n_factors
    parallel = Schedule(w.schedule) is Schedule.PARALLEL
    _program_static(tr, m)
    for iters in info["iterations"]:
        tr.stage("load")
        tr.write_rows("disentangle", F + 1)
        for _ in range(iters):
            for i in range(F):
                sim, proj = (f"similarity{i}", f"projection{i}") if parallel else ("similarity", "projection")
                tr.stage("unbind")
                tr.xor("disentangle", F)
                if not parallel:
                    tr.stage("reprogram")
                    tr.write_rows(sim, w.n_items, reprogram=True)
                    tr.write_rows(proj, w.n_items, reprogram=True)
                tr.stage("similarity")
                tr.mvm(sim)
                tr.periph("adder", w.n_items)
                tr.stage("projection")
                tr.mvm(proj)
                tr.periph("threshold", D)
                tr.stage("update")
                tr.write_rows("disentangle", 1)
    return tr.finish(w.n_queries * w.query_interval, info)


def _trace_classification(w: ClassificationWorkload, m: Mapping, info: dict) -> OpTrace:
    tr, D, a, arch = Tracer(m), w.dim, m.arch.accum_bits, m.arch
    _program_static(tr, m)
    active = w.n_features
    if arch.sparsity_scheduler:
        active = int(round(w.n_features * (1.0 - arch.sparsity)))
    for _ in range(w.n_samples):
        tr.stage("encode")
        tr.mvm("projection_matrix", active)
        if arch.fp_partitioner:
            tr.periph("exp_read_bits", active * arch.exponent_bits)
            tr.periph("exp_add", active)
            tr.periph("exp_max", active)
            tr.periph("mantissa_shift", active)
        tr.write_rows("encoding", a)
        tr.periph("threshold", D)
        tr.stage("classify")
        tr.mvm("classification")
        tr.periph("wta", w.n_classes)
    return tr.finish(w.n_samples * w.sample_interval, info)


def trace_workload(w: Workload, mapping: Mapping) -> OpTrace:
    info = run_workload(w)
    if mapping.workload != w.name:
        raise MappingError(f"mapping is for {mapping.workload!r}, workload is {w.name!r}")
    if isinstance(w, PerceptionWorkload):
        return _trace_perception(w, mapping, info)
    if isinstance(w, NavigationWorkload):
        return _trace_navigation(w, mapping, info)
    if isinstance(w, FactorizationWorkload):
        return _trace_factorization(w, mapping, info)
    return _trace_classification(w, mapping, info)
