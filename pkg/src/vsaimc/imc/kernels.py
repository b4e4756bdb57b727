"""Kernel graphs F(I, P, C) and their spatial or temporal lowering onto cores.

A graph is a set of kernel nodes, each tagged with an op type and a mode.
Spatial lowering gives every mode its own core group; temporal lowering
shares one group across modes, selected by control conditions, and rewrites
it at every mode switch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..errors import MappingError, ShapeError
from .arch import ROLE_ENGINE, Architecture, CoreKind, CoreSpec, Engine, Mapping, Role
from .trace import OpTrace, Tracer


class OpType(str, Enum):
    BIND = "bind"
    BUNDLE = "bundle"
    PERMUTE = "permute"
    SIMILARITY = "similarity"
    PROJECTION = "projection"


class Strategy(str, Enum):
    SPATIAL = "spatial"
    TEMPORAL = "temporal"


OP_ROLE = {
    OpType.BIND: Role.ITEM_MEMORY,
    OpType.BUNDLE: Role.ENCODING,
    OpType.PERMUTE: Role.ENCODING,
    OpType.SIMILARITY: Role.SIMILARITY,
    OpType.PROJECTION: Role.PROJECTION,
}


@dataclass(frozen=True)
class KernelNode:
    """``rows``: stored D-bit operands the node needs in memory (0 for pure periphery work)."""

    name: str
    op: OpType
    mode: str
    inputs: tuple[str, ...]
    rows: int = 0
    role: Role | None = None

    def __post_init__(self):
        object.__setattr__(self, "op", OpType(self.op))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.role is not None:
            object.__setattr__(self, "role", Role(self.role))
        if self.rows < 0:
            raise ShapeError(f"kernel {self.name}: rows must be >= 0")

    @property
    def core_role(self) -> Role:
        return self.role or OP_ROLE[self.op]


@dataclass(frozen=True)
class KernelGraph:
    nodes: tuple[KernelNode, ...]
    item_inputs: tuple[str, ...]  # I
    composed_inputs: tuple[str, ...] = ()  # P
    controls: tuple[str, ...] = ()  # C
    dim: int = 10_000
    name: str = "kernels"

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        names = [n.name for n in self.nodes]
        sources = set(self.item_inputs) | set(self.composed_inputs)
        if len(set(names)) != len(names) or sources & set(names):
            raise ShapeError("kernel and input names must be unique")
        if not self.nodes:
            raise ShapeError("a kernel graph needs at least one node")
        # every node must be reachable from an input through defined edges, without cycles
        reached, pending = set(sources), list(self.nodes)
        while pending:
            ready = [n for n in pending if n.inputs and all(i in reached for i in n.inputs)]
            if not ready:
                bad = ", ".join(n.name for n in pending)
                raise ShapeError(f"kernel node(s) not reachable from the inputs: {bad}")
            reached.update(n.name for n in ready)
            pending = [n for n in pending if n not in ready]

    @property
    def modes(self) -> list[str]:
        out: list[str] = []
        for n in self.nodes:
            if n.mode not in out:
                out.append(n.mode)
        return out

    @property
    def mode_partitioned(self) -> bool:
        """True when no control constructs multiplex shared data paths."""
        return not self.controls

    def nodes_in(self, mode: str) -> list[KernelNode]:
        return [n for n in self.nodes if n.mode == mode]


def tree_classifier_graph(n_features: int = 16, depth: int = 3, n_classes: int = 4,
                          dim: int = 10_000) -> KernelGraph:
    """Encoding, tree search over 2^depth - 1 node vectors, then associative search over classes."""
    return KernelGraph(
        (
            KernelNode("bind_features", OpType.BIND, "encoding", ("feature_ids", "feature_values"), n_features),
            KernelNode("bundle_features", OpType.BUNDLE, "encoding", ("bind_features",)),
            KernelNode("tree_search", OpType.SIMILARITY, "tree search", ("bundle_features",), 2 ** depth - 1,
                       Role.TREE_SEARCH),
            KernelNode("associative_search", OpType.SIMILARITY, "associative search", ("tree_search",), n_classes,
                       Role.CLASSIFICATION),
        ),
        item_inputs=("feature_ids", "feature_values"),
        dim=dim,
        name="tree-classifier",
    )


def _role_rows(nodes: Sequence[KernelNode]) -> dict[Role, int]:
    out: dict[Role, int] = {}
    for n in nodes:
        if n.rows:
            out[n.core_role] = out.get(n.core_role, 0) + n.rows
    return out


def _core(arch: Architecture, cid: str, role: Role, kind: CoreKind, rows: int, dim: int, group: str,
          engine: Engine | None = None) -> CoreSpec:
    folds = arch.dimension_divider
    # shared groups keep the dedicated groups' technology so only the mapping strategy differs
    return CoreSpec(cid, engine or ROLE_ENGINE[role], kind, rows, math.ceil(dim / folds), arch.static_memory, role,
                    folds, None, group)


def _engine_rows(nodes: Sequence[KernelNode]) -> dict[Engine, int]:
    out: dict[Engine, int] = {}
    for role, rows in _role_rows(nodes).items():
        e = ROLE_ENGINE[role]
        out[e] = out.get(e, 0) + rows
    return out


def lower_kernels(kg: KernelGraph, strategy: Strategy = Strategy.SPATIAL,
                  arch: Architecture | None = None) -> Mapping:
    arch = arch or Architecture()
    strategy = Strategy(strategy)
    arch.check_roles(n.core_role for n in kg.nodes)
    modes = kg.modes
    if strategy is Strategy.SPATIAL or len(modes) == 1:
        cores = []
        for m in modes:
            for role, rows in _role_rows(kg.nodes_in(m)).items():
                cores.append(_core(arch, f"{m}/{role.value}", role, CoreKind.STATIC, rows, kg.dim, m))
        return Mapping(kg.name, arch, tuple(cores), kg.dim, strategy.value, (), {"modes": modes})
    # one generic array per engine, sized for the most demanding mode
    need: dict[Engine, int] = {}
    for m in modes:
        for e, rows in _engine_rows(kg.nodes_in(m)).items():
            need[e] = max(need.get(e, 0), rows)
    cores = tuple(_core(arch, f"shared/{e.value}", Role.SHARED, CoreKind.DYNAMIC, rows, kg.dim, "shared", e)
                  for e, rows in need.items())
    controls = tuple(f"mode == {m!r}" for m in modes)
    return Mapping(kg.name, arch, cores, kg.dim, strategy.value, controls, {"modes": modes})


def trace_kernels(kg: KernelGraph, mapping: Mapping, schedule: Sequence[str] | None = None,
                  invocation_interval: float = 1e-3) -> OpTrace:
    """Run the schedule of modes once each; temporal groups are rewritten at every mode switch."""
    schedule = list(schedule) if schedule is not None else kg.modes
    unknown = set(schedule) - set(kg.modes)
    if unknown:
        raise MappingError(f"schedule names unknown mode(s): {sorted(unknown)}")
    tr = Tracer(mapping)
    shared = mapping.strategy == Strategy.TEMPORAL.value and len(kg.modes) > 1
    D = kg.dim

    def core_for(mode: str, role: Role) -> str:
        return f"shared/{ROLE_ENGINE[role].value}" if shared else f"{mode}/{role.value}"

    tr.stage("program", offline=True)
    if shared:
        for e, rows in _engine_rows(kg.nodes_in(schedule[0])).items():
            tr.program(f"shared/{e.value}", rows)
    else:
        for c in mapping.cores:
            tr.program(c.id)
    loaded = schedule[0]
    for k, mode in enumerate(schedule):
        tr.stage(f"{k}:{mode}")
        if shared and mode != loaded:
            # one reprogram event per switch, however many arrays it rewrites
            for k_e, (e, rows) in enumerate(_engine_rows(kg.nodes_in(mode)).items()):
                tr.write_rows(f"shared/{e.value}", rows, reprogram=k_e == 0)
            loaded = mode
        for n in kg.nodes_in(mode):
            if n.rows:
                cid = core_for(mode, n.core_role)
                if n.op in (OpType.SIMILARITY, OpType.PROJECTION):
                    tr.mvm(cid, n.rows)
                else:
                    tr.xor(cid, n.rows)
            if n.op is OpType.BUNDLE:
                tr.periph("adder", D)
                tr.periph("threshold", D)
            elif n.op is OpType.PERMUTE:
                tr.periph("shift", D)
            elif n.op is OpType.SIMILARITY:
                tr.periph("wta", max(n.rows, 1))
            elif n.op is OpType.PROJECTION:
                tr.periph("threshold", D)
    return tr.finish(len(schedule) * invocation_interval, {"schedule": schedule})
