"""In-memory-computing architecture template and cost model."""

from .arch import Architecture, CoreKind, CoreSpec, Engine, Mapping, Role
from .bounds import Category, EncodingKind, WorkloadDescriptor, bounds_table, footprint_bounds, footprint_bytes
from .cost import CostReport, estimate_cost, mapping_footprint
from .kernels import KernelGraph, KernelNode, OpType, Strategy, lower_kernels, trace_kernels, tree_classifier_graph
from .sweep import DEFAULT_CONFIGS, NODE_CONFIGS, evaluate, node_sweep, run_sweep
from .tech import MemoryKind, MemoryTechnology, TechTable, load_node_scaling, load_tech_table, scale_node
from .trace import OpTrace, Tracer
from .workloads import (
    ClassificationWorkload,
    FactorizationWorkload,
    NavigationWorkload,
    PerceptionWorkload,
    default_workloads,
    map_workload,
    run_workload,
    trace_workload,
)

__all__ = [
    "Architecture", "CoreKind", "CoreSpec", "Engine", "Mapping", "Role",
    "Category", "EncodingKind", "WorkloadDescriptor", "bounds_table", "footprint_bounds", "footprint_bytes",
    "CostReport", "estimate_cost", "mapping_footprint",
    "KernelGraph", "KernelNode", "OpType", "Strategy", "lower_kernels", "trace_kernels", "tree_classifier_graph",
    "DEFAULT_CONFIGS", "NODE_CONFIGS", "evaluate", "node_sweep", "run_sweep",
    "MemoryKind", "MemoryTechnology", "TechTable", "load_node_scaling", "load_tech_table", "scale_node",
    "OpTrace", "Tracer",
    "ClassificationWorkload", "FactorizationWorkload", "NavigationWorkload", "PerceptionWorkload",
    "default_workloads", "map_workload", "run_workload", "trace_workload",
]
