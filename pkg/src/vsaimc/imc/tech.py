"""Memory technology parameters, the default table, and node scaling."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import IncompleteTableError, InvalidHyperparameterError, UnsupportedNodeError


class MemoryKind(str, Enum):
    SRAM = "SRAM"
    EDRAM = "eDRAM"
    RRAM = "RRAM"
    MRAM = "MRAM"
    PCM = "PCM"
    FLASH_NAND = "FlashNAND"


NODES = ("65", "40_45", "22")
_NODE_NM = {"65": 65, "40_45": 45, "22": 22}


def node_key(node) -> str:
    """Normalize 65 / "65" / 40 / 45 / "40_45" / 22 to a scaling-table key."""
    s = str(node).replace("nm", "").strip()
    if s in ("40", "45", "40/45"):
        s = "40_45"
    if s not in NODES:
        raise UnsupportedNodeError(f"technology node {node!r} not in {NODES}")
    return s


@dataclass(frozen=True)
class MemoryTechnology:
    """Per-bit device parameters. ``area_per_bit`` is the cell area; a cell holds ``bits_per_cell`` bits."""

    name: MemoryKind
    node_nm: int
    read_energy_per_bit: float
    write_energy_per_bit: float
    read_latency: float
    write_latency: float
    area_per_bit: float
    standby_power_per_bit: float
    refresh_interval: float | None
    retention: float | None
    bits_per_cell: int
    volatile: bool
    compute_energy_per_bit: float = 0.0  # in-array XOR/MAC per bit-op on top of the read
    refresh_energy_per_bit: float = 0.0
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "name", MemoryKind(self.name))
        if self.bits_per_cell < 1:
            raise InvalidHyperparameterError("bits_per_cell must be >= 1")
        nums = (self.read_energy_per_bit, self.write_energy_per_bit, self.read_latency, self.write_latency,
                self.area_per_bit, self.standby_power_per_bit, self.compute_energy_per_bit,
                self.refresh_energy_per_bit)
        if any(v < 0 for v in nums):
            raise InvalidHyperparameterError(f"{self.name.value}: parameters must be >= 0")
        if (self.refresh_interval is not None) != (self.name is MemoryKind.EDRAM):
            raise InvalidHyperparameterError("refresh_interval is set for eDRAM and only for eDRAM")
        if self.refresh_interval is not None and self.refresh_interval <= 0:
            raise InvalidHyperparameterError("refresh_interval must be > 0")
        if not self.volatile and self.write_energy_per_bit < self.read_energy_per_bit:
            raise InvalidHyperparameterError(f"{self.name.value}: NVM write energy below read energy")

    @property
    def is_nvm(self) -> bool:
        return not self.volatile

    @property
    def refresh_power_per_bit(self) -> float:
        if self.refresh_interval is None:
            return 0.0
        return self.refresh_energy_per_bit / self.refresh_interval


@dataclass(frozen=True)
class LogicParams:
    """Periphery constants: adders, thresholds, winner-take-all, FP helpers, buffers."""

    node_nm: int
    adder_energy: float
    adder_latency: float
    threshold_energy: float
    threshold_latency: float
    wta_energy: float
    wta_latency: float
    shift_energy: float
    shift_latency: float
    exp_add_energy: float
    exp_max_energy: float
    mantissa_shift_energy: float
    fp_op_latency: float
    buffer_energy_per_bit: float
    buffer_area_per_bit: float
    periphery_area_per_col: float
    source: str = ""


_REQUIRED_MEM = [f.name for f in fields(MemoryTechnology) if f.name not in ("name", "source")]
_REQUIRED_LOGIC = [f.name for f in fields(LogicParams) if f.name != "source"]
_ENERGY = ("read_energy_per_bit", "write_energy_per_bit", "compute_energy_per_bit", "refresh_energy_per_bit")
_LATENCY = ("read_latency", "write_latency")


def _require(entry: Mapping, keys, where: str) -> None:
    missing = [k for k in keys if k not in entry]
    if missing:
        raise IncompleteTableError(f"{where}: missing {', '.join(missing)}")


@dataclass(frozen=True)
class TechTable:
    memories: Mapping[str, MemoryTechnology]
    logic: LogicParams

    def __getitem__(self, name) -> MemoryTechnology:
        key = MemoryKind(name).value if not isinstance(name, MemoryKind) else name.value
        try:
            return self.memories[key]
        except KeyError:
            raise IncompleteTableError(f"no technology entry for {key}") from None

    def at_node(self, node) -> TechTable:
        scale = load_node_scaling()
        return TechTable({k: scale_node(t, node, scale) for k, t in self.memories.items()},
                         scale_logic(self.logic, node, scale))


def tech_table_from_dict(raw: Mapping) -> TechTable:
    if "memories" not in raw or "logic" not in raw:
        raise IncompleteTableError("tech table needs 'memories' and 'logic' sections")
    mems = {}
    for name, entry in raw["memories"].items():
        _require(entry, _REQUIRED_MEM, name)
        kind = MemoryKind(name)
        mems[kind.value] = MemoryTechnology(kind, **{k: entry[k] for k in _REQUIRED_MEM},
                                            source=entry.get("source", ""))
    _require(raw["logic"], _REQUIRED_LOGIC, "logic")
    logic = LogicParams(**{k: raw["logic"][k] for k in _REQUIRED_LOGIC}, source=raw["logic"].get("source", ""))
    return TechTable(mems, logic)


def _read_json(path: str | Path | None, default: str) -> dict:
    if path is None:
        return json.loads(resources.files("vsaimc.imc").joinpath("data", default).read_text())
    return json.loads(Path(path).read_text())


def load_tech_table(path: str | Path | None = None, node=None) -> TechTable:
    """The shipped default table (65 nm) or a JSON file of the same layout, optionally scaled to ``node``."""
    table = tech_table_from_dict(_read_json(path, "tech_table.json"))
    return table.at_node(node) if node is not None else table


def load_node_scaling(path: str | Path | None = None) -> dict:
    raw = _read_json(path, "node_scaling.json")
    for group in ("silicon", "nvm"):
        if group not in raw:
            raise IncompleteTableError(f"node scaling table lacks {group!r}")
        for q in ("energy", "latency", "area", "standby"):
            _require(raw[group].get(q, {}), NODES, f"{group}.{q}")
    return raw


def _factor(scale: dict, group: str, quantity: str, src: str, dst: str) -> float:
    table = scale[group][quantity]
    return table[dst] / table[src]


def scale_node(tech: MemoryTechnology, target_node, scale: dict | None = None) -> MemoryTechnology:
    """Rescale a technology entry from its own node to ``target_node``.

    SRAM/eDRAM follow the silicon factors; NVM cells use the (sub-linear) NVM factors.
    """
    scale = scale or load_node_scaling()
    dst, src = node_key(target_node), node_key(tech.node_nm)
    if dst == src:
        return tech
    group = "silicon" if tech.name.value in scale.get("silicon_memories", ["SRAM", "eDRAM"]) else "nvm"
    fe = _factor(scale, group, "energy", src, dst)
    fl = _factor(scale, group, "latency", src, dst)
    fa = _factor(scale, group, "area", src, dst)
    fs = _factor(scale, group, "standby", src, dst)
    changes = {k: getattr(tech, k) * fe for k in _ENERGY}
    changes.update({k: getattr(tech, k) * fl for k in _LATENCY})
    changes.update(area_per_bit=tech.area_per_bit * fa, standby_power_per_bit=tech.standby_power_per_bit * fs,
                   node_nm=_NODE_NM[dst])
    return replace(tech, **changes)


def scale_logic(logic: LogicParams, target_node, scale: dict | None = None) -> LogicParams:
    scale = scale or load_node_scaling()
    dst, src = node_key(target_node), node_key(logic.node_nm)
    if dst == src:
        return logic
    fe = _factor(scale, "silicon", "energy", src, dst)
    fl = _factor(scale, "silicon", "latency", src, dst)
    fa = _factor(scale, "silicon", "area", src, dst)
    changes = {}
    for f in fields(LogicParams):
        if f.name.endswith("energy") or f.name.endswith("energy_per_bit"):
            changes[f.name] = getattr(logic, f.name) * fe
        elif f.name.endswith("latency"):
            changes[f.name] = getattr(logic, f.name) * fl
        elif "area" in f.name:
            changes[f.name] = getattr(logic, f.name) * fa
    return replace(logic, node_nm=_NODE_NM[dst], **changes)
