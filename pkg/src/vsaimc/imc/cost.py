"""Energy, latency, area and footprint of a trace on a mapping under a tech table."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .arch import Mapping
from .tech import TechTable, load_tech_table
from .trace import OpTrace

SPLITS = ("read", "write", "compute", "standby", "refresh")


@dataclass(frozen=True)
class CostReport:
    energy: float  # J
    latency: float  # s
    area: float  # mm^2
    edp: float  # J*s
    energy_split: dict = field(default_factory=dict)
    footprint: dict = field(default_factory=dict)  # bytes of cells per core
    footprint_total: int = 0
    per_core_energy: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "energy": self.energy, "latency": self.latency, "area": self.area, "edp": self.edp,
            "energy_split": dict(self.energy_split), "footprint": dict(self.footprint),
            "footprint_total": self.footprint_total, "per_core_energy": dict(self.per_core_energy),
        }


def core_cells(core, tech) -> int:
    return math.ceil(core.bits / tech.bits_per_cell)


def mapping_footprint(mapping: Mapping, techs: TechTable | None = None) -> dict[str, int]:
    """Bytes of storage cells per core (a 3-bit cell counts once)."""
    techs = techs or load_tech_table()
    return {c.id: math.ceil(core_cells(c, techs[c.memory]) / 8) for c in mapping.cores}


_PERIPH_ENERGY = {
    "adder": "adder_energy", "threshold": "threshold_energy", "wta": "wta_energy", "shift": "shift_energy",
    "exp_read_bits": "buffer_energy_per_bit", "exp_add": "exp_add_energy", "exp_max": "exp_max_energy",
    "mantissa_shift": "mantissa_shift_energy", "buffer_bits": "buffer_energy_per_bit",
}
_PERIPH_LATENCY = {
    "adder": "adder_latency", "threshold": "threshold_latency", "wta": "wta_latency", "shift": "shift_latency",
    "exp_add": "fp_op_latency", "exp_max": "fp_op_latency", "mantissa_shift": "fp_op_latency",
}


def estimate_cost(trace: OpTrace, mapping: Mapping, techs: TechTable | None = None) -> CostReport:
    """Sum memory, compute and periphery energy; stage-wise critical-path latency; cell plus periphery area.

    Standby leakage and eDRAM refresh accrue on every allocated bit for the
    trace's wall duration.
    """
    techs = techs or load_tech_table()
    logic = techs.logic
    split = dict.fromkeys(SPLITS, 0.0)
    per_core = {}
    totals = trace.core_totals()
    for core in mapping.cores:
        t = techs[core.memory]
        c = totals.get(core.id)
        e = dict.fromkeys(SPLITS, 0.0)
        if c is not None:
            e["read"] = c.reads * t.read_energy_per_bit
            e["write"] = (c.writes + c.program_writes) * t.write_energy_per_bit
            e["compute"] = c.ops * t.compute_energy_per_bit
        e["standby"] = core.bits * t.standby_power_per_bit * trace.duration
        if t.refresh_interval is not None:
            e["refresh"] = (trace.duration / t.refresh_interval) * core.bits * t.refresh_energy_per_bit
        for k in SPLITS:
            split[k] += e[k]
        per_core[core.id] = sum(e.values())
    for op, n in trace.periphery_totals().items():
        split["compute"] += n * getattr(logic, _PERIPH_ENERGY[op])

    latency = 0.0
    lanes = mapping.lanes
    for st in trace.stages:
        if st.offline:
            continue
        core_t = [c.read_cycles * techs[mapping.core(cid).memory].read_latency
                  + (c.write_cycles + c.program_cycles) * techs[mapping.core(cid).memory].write_latency
                  for cid, c in st.cores.items()]
        periph_t = sum(math.ceil(n / lanes) * getattr(logic, _PERIPH_LATENCY[op])
                       for op, n in st.periphery.items() if op in _PERIPH_LATENCY)
        latency += (max(core_t) if core_t else 0.0) + periph_t

    area = sum(core.bits * techs[core.memory].area_per_bit / techs[core.memory].bits_per_cell
               + core.cols * logic.periphery_area_per_col for core in mapping.cores)
    area += mapping.buffer_bits * logic.buffer_area_per_bit

    fp = mapping_footprint(mapping, techs)
    energy = sum(split.values())
    return CostReport(energy, latency, area, energy * latency, split, fp, sum(fp.values()), per_core)
