"""Architecture template: engines, static/dynamic cores, periphery switches, mappings."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping as TMapping

from ..errors import InvalidHyperparameterError, MappingError
from .tech import MemoryKind


class Engine(str, Enum):
    ENCODING = "Encoding"
    SIMILARITY = "SimilarityCheck"


class CoreKind(str, Enum):
    STATIC = "Static"
    DYNAMIC = "Dynamic"


class Role(str, Enum):
    ITEM_MEMORY = "ItemMemory"
    VALUE_EMBEDDING = "ValueEmbedding"
    PROJECTION_MATRIX = "ProjectionMatrix"
    ENCODING = "Encoding"
    CLASSIFICATION = "Classification"
    SENSOR = "Sensor"
    SENSOR_VALUES = "SensorValues"
    ACTUATOR = "Actuator"
    SAP = "SAP"
    PROGRAM = "Program"
    CLEANUP = "Cleanup"
    DISENTANGLE = "Disentangle"
    SIMILARITY = "Similarity"
    PROJECTION = "Projection"
    TREE_SEARCH = "TreeSearch"
    SHARED = "Shared"  # time-multiplexed across kernel modes


ROLE_ENGINE = {
    Role.ITEM_MEMORY: Engine.ENCODING,
    Role.VALUE_EMBEDDING: Engine.ENCODING,
    Role.PROJECTION_MATRIX: Engine.ENCODING,
    Role.ENCODING: Engine.ENCODING,
    Role.SENSOR: Engine.ENCODING,
    Role.SENSOR_VALUES: Engine.ENCODING,
    Role.ACTUATOR: Engine.ENCODING,
    Role.SAP: Engine.ENCODING,
    Role.DISENTANGLE: Engine.ENCODING,
    Role.PROJECTION: Engine.ENCODING,
    Role.PROGRAM: Engine.SIMILARITY,
    Role.CLASSIFICATION: Engine.SIMILARITY,
    Role.CLEANUP: Engine.SIMILARITY,
    Role.SIMILARITY: Engine.SIMILARITY,
    Role.TREE_SEARCH: Engine.SIMILARITY,
}


@dataclass(frozen=True)
class CoreSpec:
    """One IMC array. ``rows`` operand vectors of D bits, stored as ``folds`` segments of ``cols`` columns.

    ``allocated_rows`` is the physical row count: fewer than ``rows`` means the
    operand is time-multiplexed through the array (reprograms on every pass),
    more means over-provisioning (area and standby only).
    """

    id: str
    engine: Engine
    kind: CoreKind
    rows: int
    cols: int
    memory: MemoryKind
    role: Role
    folds: int = 1
    allocated_rows: int | None = None
    group: str = ""

    def __post_init__(self):
        object.__setattr__(self, "memory", MemoryKind(self.memory))
        if self.allocated_rows is None:
            object.__setattr__(self, "allocated_rows", self.rows)
        if self.rows < 1 or self.cols < 1 or self.folds < 1 or self.allocated_rows < 1:
            raise InvalidHyperparameterError(f"core {self.id}: rows, cols and folds must be >= 1")

    @property
    def dim(self) -> int:
        return self.cols * self.folds

    @property
    def bits(self) -> int:
        """Allocated storage bits."""
        return self.allocated_rows * self.cols * self.folds

    @property
    def passes(self) -> int:
        """Array loads needed to sweep the whole operand once."""
        return math.ceil(self.rows / self.allocated_rows)


@dataclass(frozen=True)
class Architecture:
    """Memory assignment plus periphery switches.

    Static cores take ``static_memory`` and dynamic cores ``dynamic_memory``;
    a homogeneous design uses one technology for both.
    """

    static_memory: MemoryKind = MemoryKind.SRAM
    dynamic_memory: MemoryKind = MemoryKind.SRAM
    name: str = ""
    sparsity_scheduler: bool = False
    sparsity: float = 0.0
    fp_partitioner: bool = False
    exponent_bits: int = 8
    dimension_divider: int = 1
    buffer_lines: int = 2  # double-buffered D-bit lines per engine
    accum_bits: int = 8
    capacity_scale: float = 1.0
    core_capacity_rows: int | None = None
    roles: frozenset | None = None  # None: every role is available

    def __post_init__(self):
        object.__setattr__(self, "static_memory", MemoryKind(self.static_memory))
        object.__setattr__(self, "dynamic_memory", MemoryKind(self.dynamic_memory))
        if self.dimension_divider < 1:
            raise InvalidHyperparameterError("dimension_divider must be >= 1")
        if not 0.0 <= self.sparsity < 1.0:
            raise InvalidHyperparameterError("sparsity must be in [0, 1)")
        if self.capacity_scale < 1.0:
            raise InvalidHyperparameterError("capacity_scale must be >= 1 (use core_capacity_rows to under-provision)")
        if self.accum_bits < 1 or self.buffer_lines < 0 or self.exponent_bits < 1:
            raise InvalidHyperparameterError("accum_bits and exponent_bits must be >= 1, buffer_lines >= 0")
        if self.core_capacity_rows is not None and self.core_capacity_rows < 1:
            raise InvalidHyperparameterError("core_capacity_rows must be >= 1")
        if self.roles is not None:
            object.__setattr__(self, "roles", frozenset(Role(r) for r in self.roles))
        if not self.name:
            label = self.static_memory.value if self.static_memory is self.dynamic_memory else \
                f"{self.static_memory.value}/{self.dynamic_memory.value}"
            object.__setattr__(self, "name", label)

    @classmethod
    def homogeneous(cls, memory, **kw) -> Architecture:
        return cls(memory, memory, **kw)

    @classmethod
    def heterogeneous(cls, static, dynamic, **kw) -> Architecture:
        return cls(static, dynamic, **kw)

    @property
    def is_heterogeneous(self) -> bool:
        return self.static_memory is not self.dynamic_memory

    def memory_for(self, kind: CoreKind) -> MemoryKind:
        return self.static_memory if CoreKind(kind) is CoreKind.STATIC else self.dynamic_memory

    def check_roles(self, needed: Iterable[Role]) -> None:
        if self.roles is None:
            return
        missing = sorted(r.value for r in set(needed) - self.roles)
        if missing:
            raise MappingError(f"architecture {self.name!r} has no core for role(s) {', '.join(missing)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["static_memory"] = self.static_memory.value
        d["dynamic_memory"] = self.dynamic_memory.value
        d["roles"] = None if self.roles is None else sorted(r.value for r in self.roles)
        return d

    @classmethod
    def from_dict(cls, d: TMapping) -> Architecture:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidHyperparameterError(f"unknown architecture field(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    def with_memories(self, static, dynamic) -> Architecture:
        return replace(self, static_memory=MemoryKind(static), dynamic_memory=MemoryKind(dynamic), name="")


def make_core(arch: Architecture, id: str, role: Role, kind: CoreKind, rows: int, dim: int,
              group: str = "") -> CoreSpec:
    """Core for ``rows`` D-bit operands, sized by the architecture's fold and capacity settings."""
    folds = arch.dimension_divider
    cols = math.ceil(dim / folds)
    alloc = math.ceil(rows * arch.capacity_scale)
    if arch.core_capacity_rows is not None:
        alloc = min(alloc, arch.core_capacity_rows)
    return CoreSpec(id, ROLE_ENGINE[role], kind, rows, cols, arch.memory_for(kind), role, folds, alloc, group)


@dataclass(frozen=True)
class Mapping:
    """Cores bound to one workload (or kernel graph) under one architecture."""

    workload: str
    arch: Architecture
    cores: tuple[CoreSpec, ...]
    dim: int
    strategy: str = "spatial"
    controls: tuple[str, ...] = ()
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ids = [c.id for c in self.cores]
        if len(set(ids)) != len(ids):
            raise MappingError("duplicate core ids in mapping")

    def core(self, core_id: str) -> CoreSpec:
        for c in self.cores:
            if c.id == core_id:
                return c
        raise MappingError(f"no core {core_id!r} in mapping for {self.workload}")

    @property
    def static_cores(self) -> list[CoreSpec]:
        return [c for c in self.cores if c.kind is CoreKind.STATIC]

    @property
    def dynamic_cores(self) -> list[CoreSpec]:
        return [c for c in self.cores if c.kind is CoreKind.DYNAMIC]

    @property
    def capacity_bits(self) -> int:
        return sum(c.bits for c in self.cores)

    @property
    def lanes(self) -> int:
        """Periphery lanes: one per column."""
        return math.ceil(self.dim / self.arch.dimension_divider)

    @property
    def buffer_bits(self) -> int:
        engines = {c.engine for c in self.cores}
        return self.arch.buffer_lines * self.dim * len(engines)
