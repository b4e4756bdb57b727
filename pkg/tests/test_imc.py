import dataclasses
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsaimc.errors import (
    IncompleteTableError,
    InvalidDescriptorError,
    InvalidHyperparameterError,
    MappingError,
    ShapeError,
    UnsupportedNodeError,
)
from vsaimc.imc import (
    Architecture,
    Category,
    ClassificationWorkload,
    CoreKind,
    EncodingKind,
    FactorizationWorkload,
    KernelGraph,
    KernelNode,
    MemoryKind,
    NavigationWorkload,
    OpType,
    Tracer,
    PerceptionWorkload,
    Role,
    WorkloadDescriptor,
    bounds_table,
    estimate_cost,
    footprint_bounds,
    footprint_bytes,
    load_tech_table,
    lower_kernels,
    map_workload,
    mapping_footprint,
    run_sweep,
    run_workload,
    scale_node,
    trace_kernels,
    trace_workload,
    tree_classifier_graph,
)
from vsaimc.imc.tech import tech_table_from_dict
from vsaimc.imc.trace import OpTrace
from vsaimc.reasoning import Schedule

TECH = load_tech_table()
SMALL = 1024


def cost(w, arch, techs=TECH):
    m = map_workload(w, arch)
    return m, trace_workload(w, m), estimate_cost(trace_workload(w, m), m, techs)


# technology table


def test_default_table_invariants():
    for t in TECH.memories.values():
        assert t.bits_per_cell >= 1 and t.source
        assert (t.refresh_interval is not None) == (t.name is MemoryKind.EDRAM)
        if t.is_nvm:
            assert t.write_energy_per_bit >= t.read_energy_per_bit
            assert t.standby_power_per_bit == 0
    assert TECH["PCM"].bits_per_cell == 3


def test_incomplete_table_and_bad_entries():
    raw = json.loads(json.dumps({"memories": {"SRAM": {"node_nm": 65}}, "logic": {}}))
    with pytest.raises(IncompleteTableError):
        tech_table_from_dict(raw)
    with pytest.raises(IncompleteTableError):
        TechTable_without_mram()["MRAM"]
    with pytest.raises(InvalidHyperparameterError):
        dataclasses.replace(TECH["RRAM"], write_energy_per_bit=1e-16)
    with pytest.raises(InvalidHyperparameterError):
        dataclasses.replace(TECH["SRAM"], refresh_interval=1e-5)


def TechTable_without_mram():
    mems = {k: v for k, v in TECH.memories.items() if k != "MRAM"}
    return dataclasses.replace(TECH, memories=mems)


def test_custom_table_file_round_trip(tmp_path):
    from importlib import resources
    raw = json.loads(resources.files("vsaimc.imc").joinpath("data", "tech_table.json").read_text())
    raw["memories"]["SRAM"]["read_energy_per_bit"] *= 2
    p = tmp_path / "tech.json"
    p.write_text(json.dumps(raw))
    assert load_tech_table(p)["SRAM"].read_energy_per_bit == 2 * TECH["SRAM"].read_energy_per_bit
    del raw["logic"]["wta_energy"]
    p.write_text(json.dumps(raw))
    with pytest.raises(IncompleteTableError):
        load_tech_table(p)


def test_node_scaling():
    sram, rram = TECH["SRAM"], TECH["RRAM"]
    assert scale_node(sram, 65) == sram
    s22 = scale_node(sram, 22)
    assert s22.read_energy_per_bit < sram.read_energy_per_bit
    assert s22.write_energy_per_bit < sram.write_energy_per_bit
    assert s22.read_latency < sram.read_latency and s22.write_latency < sram.write_latency
    assert s22.area_per_bit < sram.area_per_bit
    r22 = scale_node(rram, "22")
    # NVM cells shrink by a smaller factor
    assert r22.area_per_bit / rram.area_per_bit > s22.area_per_bit / sram.area_per_bit
    assert scale_node(scale_node(sram, 22), 65).read_energy_per_bit == pytest.approx(sram.read_energy_per_bit)
    assert scale_node(sram, "40_45") == scale_node(sram, 45)
    with pytest.raises(UnsupportedNodeError):
        scale_node(sram, 7)


# architecture and kernel lowering


def test_architecture_validation():
    with pytest.raises(InvalidHyperparameterError):
        Architecture(dimension_divider=0)
    with pytest.raises(InvalidHyperparameterError):
        Architecture.from_dict({"static_memory": "SRAM", "colour": "red"})
    a = Architecture.heterogeneous("MRAM", "SRAM", sparsity=0.25)
    assert Architecture.from_dict(a.to_dict()) == a
    assert a.name == "MRAM/SRAM" and a.is_heterogeneous


def test_tree_classifier_spatial_and_temporal():
    kg = tree_classifier_graph()
    assert kg.mode_partitioned
    sp = lower_kernels(kg, "spatial")
    assert {c.group for c in sp.cores} == {"encoding", "tree search", "associative search"}
    assert sp.controls == ()
    assert trace_kernels(kg, sp).reprogram_events == 0
    tm = lower_kernels(kg, "temporal")
    assert {c.group for c in tm.cores} == {"shared"} and len(tm.controls) == 3
    assert trace_kernels(kg, tm).reprogram_events == 2
    sched = ["encoding", "tree search", "associative search"] * 2
    assert trace_kernels(kg, tm, sched).reprogram_events == 5
    assert trace_kernels(kg, tm, ["encoding", "encoding"]).reprogram_events == 0


def test_single_mode_graph_lowers_identically():
    kg = KernelGraph((KernelNode("b", OpType.BIND, "only", ("x", "y"), 4),
                      KernelNode("s", OpType.SIMILARITY, "only", ("b",), 3)), ("x", "y"), dim=SMALL)
    assert lower_kernels(kg, "spatial").cores == lower_kernels(kg, "temporal").cores


def test_kernel_graph_errors():
    with pytest.raises(ShapeError):
        KernelGraph((KernelNode("a", OpType.BIND, "m", ("missing",), 1),), ("x",))
    with pytest.raises(ShapeError):
        KernelGraph((KernelNode("a", OpType.BIND, "m", ("b",), 1), KernelNode("b", OpType.BIND, "m", ("a",), 1)),
                    ("x",))
    with pytest.raises(MappingError):
        lower_kernels(tree_classifier_graph(), "spatial", Architecture(roles={Role.ITEM_MEMORY}))


@st.composite
def kernel_graphs(draw):
    n_modes = draw(st.integers(1, 4))
    nodes, prev = [], "x"
    for k in range(draw(st.integers(1, 6))):
        op = draw(st.sampled_from(list(OpType)))
        mode = f"m{draw(st.integers(0, n_modes - 1))}"
        rows = draw(st.integers(0 if op in (OpType.BUNDLE, OpType.PERMUTE) else 1, 12))
        nodes.append(KernelNode(f"n{k}", op, mode, (prev,), rows))
        prev = f"n{k}"
    return KernelGraph(tuple(nodes), ("x",), dim=SMALL)


@settings(max_examples=40, deadline=None)
@given(kernel_graphs(), st.lists(st.integers(0, 3), min_size=1, max_size=8))
def test_spatial_temporal_duality(kg, picks):
    modes = kg.modes
    sched = [modes[p % len(modes)] for p in picks]
    sp, tm = lower_kernels(kg, "spatial"), lower_kernels(kg, "temporal")
    rs = estimate_cost(trace_kernels(kg, sp, sched), sp, TECH)
    rt = estimate_cost(trace_kernels(kg, tm, sched), tm, TECH)
    assert rt.area <= rs.area + 1e-15
    assert rt.latency >= rs.latency - 1e-18


# workload mapping


def test_factorization_mappings():
    par = map_workload(FactorizationWorkload(dim=SMALL, n_queries=4), Architecture())
    sims = [c for c in par.cores if c.role is Role.SIMILARITY]
    projs = [c for c in par.cores if c.role is Role.PROJECTION]
    assert len(sims) == len(projs) == 3 and all(c.kind is CoreKind.STATIC for c in sims + projs)
    w = FactorizationWorkload(dim=SMALL, n_queries=4, schedule=Schedule.SEQUENTIAL)
    seq = map_workload(w, Architecture())
    sims = [c for c in seq.cores if c.role in (Role.SIMILARITY, Role.PROJECTION)]
    assert len(sims) == 2 and all(c.kind is CoreKind.DYNAMIC for c in sims)
    tr = trace_workload(w, seq)
    iters = sum(run_workload(w)["iterations"])
    assert tr.reprogram_events == 2 * 3 * iters
    assert tr.core_totals()["similarity"].writes == 3 * iters * 8 * SMALL


def test_navigation_recall_mapping_is_all_static():
    m = map_workload(NavigationWorkload(dim=SMALL, n_demos=10, n_queries=10, phase="recall"), Architecture())
    assert m.dynamic_cores == []
    train = map_workload(NavigationWorkload(dim=SMALL, n_demos=10), Architecture())
    assert [c.role for c in train.dynamic_cores] == [Role.SAP]


def test_perception_core_kinds():
    m = map_workload(PerceptionWorkload(dim=SMALL, n_samples=5), Architecture())
    kinds = {c.role: c.kind for c in m.cores}
    assert kinds == {Role.VALUE_EMBEDDING: CoreKind.STATIC, Role.ITEM_MEMORY: CoreKind.STATIC,
                     Role.ENCODING: CoreKind.DYNAMIC, Role.CLASSIFICATION: CoreKind.STATIC}


def test_missing_role_is_mapping_error():
    with pytest.raises(MappingError):
        map_workload(NavigationWorkload(dim=SMALL, n_demos=5), Architecture(roles={Role.SENSOR}))


# tracing


def test_navigation_single_demo_counts():
    w = NavigationWorkload(dim=SMALL, n_demos=1, n_queries=1)
    arch = Architecture()
    m = map_workload(w, arch)
    tr = trace_workload(w, m)
    S = run_workload(w)["n_sensors"]
    assert tr.stage("sensor").cores["sensor"].reads == S * SMALL
    prog = tr.core_totals()["program"]
    assert prog.program_writes == SMALL * arch.accum_bits and prog.writes == 0


def test_sparsity_scheduler_halves_macs():
    w = ClassificationWorkload(dim=SMALL, n_samples=10)
    off = trace_workload(w, map_workload(w, Architecture()))
    on = trace_workload(w, map_workload(w, Architecture(sparsity_scheduler=True, sparsity=0.5)))
    a, b = off.core_totals()["projection_matrix"], on.core_totals()["projection_matrix"]
    assert b.macs * 2 == a.macs and b.ops * 2 == a.ops


def test_fp_partitioner_adds_exponent_work():
    w = ClassificationWorkload(dim=SMALL, n_samples=10)
    off = trace_workload(w, map_workload(w, Architecture())).periphery_totals()
    on = trace_workload(w, map_workload(w, Architecture(fp_partitioner=True))).periphery_totals()
    assert off["exp_read_bits"] == off["exp_max"] == 0
    assert on["exp_max"] == on["exp_add"] == 10 * 64
    assert on["exp_read_bits"] == 10 * 64 * 8


def test_trace_is_deterministic_and_nonnegative():
    w = FactorizationWorkload(dim=SMALL, n_queries=5)
    m = map_workload(w, Architecture())
    a, b = trace_workload(w, m), trace_workload(w, m)
    assert a == b
    for c in a.core_totals().values():
        assert all(v >= 0 for v in dataclasses.asdict(c).values())


def test_trace_rejects_foreign_mapping():
    with pytest.raises(MappingError):
        trace_workload(PerceptionWorkload(dim=SMALL, n_samples=2),
                       map_workload(FactorizationWorkload(dim=SMALL, n_queries=2), Architecture()))


# cost model


def test_report_identities():
    _, _, r = cost(FactorizationWorkload(dim=SMALL, n_queries=5), Architecture.heterogeneous("MRAM", "eDRAM"))
    assert r.energy == sum(r.energy_split.values())
    assert r.edp == r.energy * r.latency
    assert r.footprint_total == sum(r.footprint.values())


def test_all_static_on_nvm_writes_only_when_programming():
    w = NavigationWorkload(dim=SMALL, n_demos=10, n_queries=10, phase="recall")
    m, tr, r = cost(w, Architecture.homogeneous("RRAM"))
    programmed = sum(c.program_writes for c in tr.core_totals().values())
    assert sum(c.writes for c in tr.core_totals().values()) == 0
    assert r.energy_split["write"] == pytest.approx(programmed * TECH["RRAM"].write_energy_per_bit)


def test_static_write_energy_independent_of_sample_count():
    arch = Architecture.homogeneous("MRAM")

    def static_writes(n):
        w = PerceptionWorkload(dim=SMALL, n_samples=n)
        m = map_workload(w, arch)
        tot = trace_workload(w, m).core_totals()
        return sum(tot[c.id].writes + tot[c.id].program_writes for c in m.static_cores), \
            sum(tot[c.id].writes for c in m.dynamic_cores)

    (s5, d5), (s10, d10) = static_writes(5), static_writes(10)
    assert s5 == s10 and d10 == 2 * d5


def test_duration_scales_refresh_only():
    w = FactorizationWorkload(dim=SMALL, n_queries=5)
    for mem in ("eDRAM", "RRAM"):
        m = map_workload(w, Architecture.homogeneous(mem))
        tr = trace_workload(w, m)
        r1 = estimate_cost(tr, m, TECH)
        r2 = estimate_cost(dataclasses.replace(tr, duration=2 * tr.duration), m, TECH)
        assert r2.energy_split["read"] == r1.energy_split["read"]
        assert r2.energy_split["refresh"] == pytest.approx(2 * r1.energy_split["refresh"])
    assert r1.energy_split["refresh"] == 0


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["reads", "writes", "program_writes", "ops", "read_cycles", "write_cycles"]),
       st.integers(1, 10 ** 6), st.sampled_from(list(MemoryKind)))
def test_more_work_never_costs_less(counter, extra, mem):
    w = FactorizationWorkload(dim=SMALL, n_queries=2)
    m = map_workload(w, Architecture.homogeneous(mem))
    tr = trace_workload(w, m)
    base = estimate_cost(tr, m, TECH)
    stages = [dataclasses.replace(s, cores={k: dataclasses.replace(v) for k, v in s.cores.items()})
              for s in tr.stages]
    target = next(s for s in stages if not s.offline and s.cores)
    c = next(iter(target.cores.values()))
    setattr(c, counter, getattr(c, counter) + extra)
    more = estimate_cost(OpTrace(tr.workload, stages, tr.duration, tr.reprogram_events), m, TECH)
    assert more.energy >= base.energy and more.latency >= base.latency


def test_capacity_rule():
    w = PerceptionWorkload(dim=SMALL, n_samples=5)
    _, tr, base = cost(w, Architecture())
    _, tr_small, small = cost(w, Architecture(core_capacity_rows=4))
    assert tr.reprogram_events == 0 and tr_small.reprogram_events > 0
    assert small.energy_split["write"] > base.energy_split["write"]
    _, _, big = cost(w, Architecture(capacity_scale=2.0))
    for k in ("read", "write", "compute"):
        assert big.energy_split[k] == base.energy_split[k]
    assert big.area > base.area and big.energy_split["standby"] > base.energy_split["standby"]
    assert big.latency == base.latency


def test_dimension_divider_trades_latency_for_area():
    w = FactorizationWorkload(dim=SMALL, n_queries=3)
    _, _, one = cost(w, Architecture())
    _, _, four = cost(w, Architecture(dimension_divider=4))
    assert four.latency > one.latency and four.area < one.area


def test_cost_is_deterministic():
    w = NavigationWorkload(dim=SMALL, n_demos=5)
    assert cost(w, Architecture.homogeneous("eDRAM"))[2] == cost(w, Architecture.homogeneous("eDRAM"))[2]


# footprint bounds


def _oracle_bytes(D, vectors_full, bw, proj_rows, bpc):
    return math.ceil(math.ceil(D * (vectors_full * bw + proj_rows) / bpc) / 8)


def test_footprint_oracle():
    # classification, RP: projection rows + classes + 2 buffers
    wd = WorkloadDescriptor(Category.CLASSIFICATION, 1000, 4, EncodingKind.RANDOM_PROJECTION, classes=10,
                            features=20, bits_per_cell=3)
    assert footprint_bytes(wd) == _oracle_bytes(1000, 10 + 2, 4, 20, 3)
    # genomics, n-gram: alphabet + window + stored references + buffers
    wd = WorkloadDescriptor(Category.GENOMICS, 1000, 1, "NGram", features=4, sample_length=50, samples=100)
    assert footprint_bytes(wd) == _oracle_bytes(1000, 4 + 3 + 100 + 2, 1, 0, 1)


def test_bounds_ranges_and_order():
    tab = {r["category"]: (r["lower_bytes"], r["upper_bytes"]) for r in bounds_table()}
    assert all(1024 <= lo <= 10 * 1024 for lo, _ in tab.values())
    low_tier = max(tab["Clustering"][1], tab["RoboticReasoning"][1])
    mid_tier = tab["Classification"][1], tab["OutlierDetection"][1]
    assert low_tier < min(mid_tier) and max(mid_tier) < tab["Genomics"][1]
    assert 5e8 <= tab["Genomics"][1] < 5e9
    assert 5e4 <= tab["Clustering"][1] < 5e5


def test_pipeline_mappings_inside_bounds():
    cases = [(PerceptionWorkload(n_samples=2), Category.MULTIMODAL_PERCEPTION),
             (NavigationWorkload(n_demos=200), Category.ROBOTIC_REASONING),
             (FactorizationWorkload(n_queries=2), Category.FACTORIZATION)]
    for w, cat in cases:
        lo, hi = footprint_bounds(WorkloadDescriptor(cat, w.dim))
        for arch in (Architecture.homogeneous("SRAM"), Architecture.homogeneous("PCM")):
            fp = sum(mapping_footprint(map_workload(w, arch), TECH).values())
            assert lo <= fp <= hi


def test_invalid_descriptors():
    with pytest.raises(InvalidDescriptorError):
        WorkloadDescriptor(Category.CLUSTERING, bit_width=2)
    with pytest.raises(InvalidDescriptorError):
        WorkloadDescriptor(Category.CLUSTERING, bits_per_cell=2)
    with pytest.raises(InvalidDescriptorError):
        WorkloadDescriptor("Astrology")
    with pytest.raises(InvalidDescriptorError):
        WorkloadDescriptor(Category.GENOMICS, encoding="NGram", sample_length=2)


# sweep


def test_sweep_shape_and_parallel_equivalence():
    ws = [FactorizationWorkload(dim=SMALL, n_queries=3), NavigationWorkload(dim=SMALL, n_demos=5)]
    serial = run_sweep(ws)
    assert len(serial) == 12
    assert all(r["norm_energy"] == 1.0 for r in serial if r["config"] == "RRAM")
    assert run_sweep(ws, jobs=2) == serial


def test_tracer_enforces_static_core_contract():
    w = NavigationWorkload(dim=SMALL, n_demos=2, n_queries=2, phase="recall")
    m = map_workload(w, Architecture())
    static = m.static_cores[0].id
    tr = Tracer(m)
    tr.stage("program", offline=True)
    tr.program(static)
    with pytest.raises(MappingError):
        tr.program(static)
    tr.stage("run")
    with pytest.raises(MappingError):
        tr.write_rows(static, 1)
