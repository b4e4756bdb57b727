"""Operation traces: per-core memory/compute counters grouped into sequential stages."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from ..errors import MappingError
from .arch import CoreKind, Mapping

PERIPHERY_OPS = ("adder", "threshold", "wta", "shift", "exp_read_bits", "exp_add", "exp_max",
                 "mantissa_shift", "buffer_bits")


@dataclass
class CoreCounters:
    reads: int = 0  # bits
    writes: int = 0  # runtime write bits
    program_writes: int = 0  # programming-epoch write bits
    ops: int = 0  # in-array XOR/MAC bit-ops
    read_cycles: int = 0
    write_cycles: int = 0
    program_cycles: int = 0
    reprograms: int = 0
    macs: int = 0  # row-parallel MAC row activations (one per operand row per pass)

    def add(self, other: CoreCounters) -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


@dataclass
class StageTrace:
    """Cores inside a stage run concurrently; stages run one after another."""

    name: str
    cores: dict[str, CoreCounters] = field(default_factory=dict)
    periphery: dict[str, int] = field(default_factory=lambda: dict.fromkeys(PERIPHERY_OPS, 0))
    offline: bool = False  # programming before deployment: energy only, no latency


@dataclass
class OpTrace:
    workload: str
    stages: list[StageTrace]
    duration: float  # wall time the cores stay allocated, s
    reprogram_events: int
    outputs: dict = field(default_factory=dict)

    def core_totals(self) -> dict[str, CoreCounters]:
        out: dict[str, CoreCounters] = {}
        for st in self.stages:
            for cid, c in st.cores.items():
                out.setdefault(cid, CoreCounters()).add(c)
        return out

    def periphery_totals(self) -> dict[str, int]:
        out = dict.fromkeys(PERIPHERY_OPS, 0)
        for st in self.stages:
            for k, v in st.periphery.items():
                out[k] += v
        return out

    def stage(self, name: str) -> StageTrace:
        for st in self.stages:
            if st.name == name:
                return st
        raise KeyError(name)

    def to_dict(self) -> dict:
        return asdict(self)


class Tracer:
    """Collects counters while a functional pipeline runs against a mapping.

    Static cores accept exactly one programming epoch; runtime writes to a
    static core are a mapping error.
    """

    def __init__(self, mapping: Mapping):
        self.mapping = mapping
        self.dim = mapping.dim
        self._stages: dict[str, StageTrace] = {}
        self._cur: StageTrace | None = None
        self._programmed: set[str] = set()
        self.reprograms = 0

    def stage(self, name: str, offline: bool = False) -> Tracer:
        if name not in self._stages:
            self._stages[name] = StageTrace(name, offline=offline)
        self._cur = self._stages[name]
        return self

    def _c(self, core_id: str) -> CoreCounters:
        if self._cur is None:
            raise MappingError("no active trace stage")
        self.mapping.core(core_id)
        return self._cur.cores.setdefault(core_id, CoreCounters())

    def program(self, core_id: str, rows: int | None = None) -> None:
        """Programming epoch: write the core's operand rows once."""
        core = self.mapping.core(core_id)
        if core.kind is CoreKind.STATIC and core_id in self._programmed:
            raise MappingError(f"static core {core_id!r} programmed twice")
        self._programmed.add(core_id)
        n = min(core.rows if rows is None else rows, core.allocated_rows)
        c = self._c(core_id)
        c.program_writes += n * core.dim
        c.program_cycles += n * core.folds

    def write_rows(self, core_id: str, rows: int = 1, reprogram: bool = False) -> None:
        core = self.mapping.core(core_id)
        if core.kind is CoreKind.STATIC:
            raise MappingError(f"runtime write to static core {core_id!r}")
        c = self._c(core_id)
        c.writes += rows * core.dim
        c.write_cycles += rows * core.folds
        if reprogram:
            c.reprograms += 1
            self.reprograms += 1

    def _reload(self, core, c: CoreCounters) -> None:
        # operand larger than the array: every pass streams all rows back in
        if core.passes > 1:
            c.writes += core.rows * core.dim
            c.write_cycles += core.rows * core.folds
            c.reprograms += core.passes
            self.reprograms += core.passes

    def read_rows(self, core_id: str, rows: int = 1) -> None:
        """Plain row reads (lookups)."""
        core = self.mapping.core(core_id)
        c = self._c(core_id)
        c.reads += rows * core.dim
        c.read_cycles += rows * core.folds

    def xor(self, core_id: str, rows: int = 1) -> None:
        """Row-by-row binding of stored rows with a streamed input."""
        core = self.mapping.core(core_id)
        c = self._c(core_id)
        c.reads += rows * core.dim
        c.ops += rows * core.dim
        c.read_cycles += rows * core.folds

    def mvm(self, core_id: str, active_rows: int | None = None) -> None:
        """Row-parallel MAC over ``active_rows`` (default all): one access per fold and pass."""
        core = self.mapping.core(core_id)
        n = core.rows if active_rows is None else active_rows
        c = self._c(core_id)
        self._reload(core, c)
        c.reads += n * core.dim
        c.ops += n * core.dim
        c.macs += n
        c.read_cycles += core.folds * core.passes

    def periph(self, op: str, n: int) -> None:
        if self._cur is None:
            raise MappingError("no active trace stage")
        if op not in self._cur.periphery:
            raise MappingError(f"unknown periphery op {op!r}")
        self._cur.periphery[op] += int(n)

    def finish(self, duration: float, outputs: dict | None = None) -> OpTrace:
        return OpTrace(self.mapping.workload, list(self._stages.values()), float(duration), self.reprograms,
                       dict(outputs or {}))
