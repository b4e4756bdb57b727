"""Memory-technology and node sweeps over the traced workloads."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .arch import Architecture
from .cost import SPLITS, estimate_cost
from .tech import NODES, TechTable, load_tech_table, node_key
from .workloads import PerceptionWorkload, Workload, default_workloads, map_workload, trace_workload

BASELINE = "RRAM"

DEFAULT_CONFIGS = (
    Architecture.homogeneous("SRAM"),
    Architecture.homogeneous("eDRAM"),
    Architecture.homogeneous("RRAM"),
    Architecture.homogeneous("MRAM"),
    Architecture.heterogeneous("MRAM", "SRAM"),
    Architecture.heterogeneous("MRAM", "eDRAM"),
)

NODE_CONFIGS = (
    Architecture.homogeneous("SRAM"),
    Architecture.homogeneous("MRAM"),
    Architecture.heterogeneous("MRAM", "SRAM"),
)


def evaluate(workload: Workload, arch: Architecture, node="65", techs: TechTable | None = None) -> dict:
    """One sweep cell: map, trace and cost ``workload`` on ``arch`` at ``node``."""
    techs = (techs or load_tech_table()).at_node(node)
    mapping = map_workload(workload, arch)
    report = estimate_cost(trace_workload(workload, mapping), mapping, techs)
    row = {
        "workload": workload.name,
        "config": arch.name,
        "static_memory": arch.static_memory.value,
        "dynamic_memory": arch.dynamic_memory.value,
        "node": node_key(node),
        "energy": report.energy,
        "latency": report.latency,
        "area": report.area,
        "edp": report.edp,
    }
    row.update({f"energy_{k}": report.energy_split[k] for k in SPLITS})
    row["footprint_bytes"] = report.footprint_total
    return row


def _cell(args) -> dict:
    return evaluate(*args)


def normalize(rows: list[dict], baseline: str = BASELINE) -> list[dict]:
    """Add norm_* columns relative to the ``baseline`` config of the same workload and node."""
    base = {(r["workload"], r["node"]): r for r in rows if r["config"] == baseline}
    out = []
    for r in rows:
        r = dict(r)
        b = base.get((r["workload"], r["node"]))
        for k in ("energy", "latency", "area", "edp"):
            r[f"norm_{k}"] = r[k] / b[k] if b else None
        out.append(r)
    return out


def run_sweep(workloads: Sequence[Workload] | None = None, configs: Sequence[Architecture] = DEFAULT_CONFIGS,
              nodes: Sequence = ("65",), jobs: int = 1, techs: TechTable | None = None,
              baseline: str = BASELINE) -> list[dict]:
    """Cross product workloads x nodes x configs; rows come back in that order for any ``jobs``."""
    workloads = list(workloads) if workloads is not None else default_workloads()
    techs = techs or load_tech_table()
    cells = [(w, a, node_key(n), techs) for w in workloads for n in nodes for a in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_cell, cells))
    else:
        rows = [_cell(c) for c in cells]
    return normalize(rows, baseline)


def node_sweep(workload: Workload | None = None, configs: Sequence[Architecture] = NODE_CONFIGS,
               nodes: Sequence = NODES, jobs: int = 1, techs: TechTable | None = None) -> list[dict]:
    """EDP and area of charge-only, NVM-only and hybrid designs across nodes, normalized to SRAM."""
    return run_sweep([workload or PerceptionWorkload()], configs, nodes, jobs, techs, baseline="SRAM")
