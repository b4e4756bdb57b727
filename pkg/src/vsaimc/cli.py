"""Batch command-line runner: ingest data, run a pipeline, write schema-versioned reports.

Settings resolve in order: field defaults, then the ``--config`` JSON file,
then ``VSAIMC_<FIELD>`` environment variables, then command-line flags.
Diagnostics go to stderr; data goes to files under ``--out``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .cognition import (
    edge_scores,
    edge_threshold,
    graph_encode,
    grid_demos,
    grid_program,
    hdff_fit,
    hdff_scores,
    make_navigation_program,
    navigation_recall,
    navigation_train,
    rank_auc,
)
from .encoders import LevelEmbedding, ProjectionEncoder, build_id_codebook, multimodal_encode
from .errors import VSAError
from .hdvec import Repr, derive_seed, from_bits
from .imc import (
    DEFAULT_CONFIGS,
    Architecture,
    ClassificationWorkload,
    FactorizationWorkload,
    NavigationWorkload,
    PerceptionWorkload,
    bounds_table,
    estimate_cost,
    evaluate,
    load_tech_table,
    map_workload,
    run_sweep,
    trace_workload,
)
from .io import (
    read_edge_list,
    read_factorization_problem,
    read_feature_csv,
    read_layer_csvs,
    read_modal_jsonl,
    read_navigation_jsonl,
    write_report,
)
from .learning import ClassifierModel, adjusted_rand_index, cluster, predict, retrain_iterative, train_single_pass
from .reasoning import Schedule, compose, factorize, random_problem
from .serialize import atomic_write, load_checkpoint, pack_container, save_checkpoint
from .synthetic import layered_features, make_blobs, random_graph, train_test_split

ENV_PREFIX = "VSAIMC_"
COMMANDS = ("encode", "train", "infer", "cluster", "factorize", "navigate", "graph", "ood", "cost", "sweep",
            "bounds")
WORKLOADS = ("perception", "navigation", "navigation-recall", "factorization", "classification")


class ConfigError(Exception):
    """Bad or inconsistent settings; the runner exits with status 2."""


@dataclass
class ExperimentConfig:
    seed: int = 0
    dim: int | None = None  # None: the subcommand's default (1024 for factorize, else 10000)
    input: str | None = None  # dataset: CSV, JSON-lines, edge list or factorization problem
    inputs: list[str] = field(default_factory=list)  # per-layer CSVs (ood training)
    query: str | None = None  # query dataset (infer, navigate, ood with queries)
    queries: list[str] = field(default_factory=list)  # per-layer query CSVs (ood)
    label_column: str = "label"
    model: str | None = None  # checkpoint stem for infer
    levels: int = 16
    quantizer: str = "sign"
    eta: float = 0.1
    epochs: int = 10
    k: int = 2
    schedule: str = "parallel"
    max_iters: int = 100
    noise_p: float = 0.0
    trials: int | None = None
    threshold: float | None = None
    workload: str | None = None  # cost: one name (default perception); sweep: comma list (default the three pipelines)
    arch: str | None = None  # architecture JSON
    tech: str | None = None  # technology table JSON
    nodes: list[str] = field(default_factory=lambda: ["65"])
    out: str = "out"
    format: str = "csv"
    jobs: int = 1

    def validate(self) -> None:
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.dim is not None and self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.schedule not in ("parallel", "sequential"):
            raise ConfigError(f"schedule must be parallel or sequential, got {self.schedule!r}")
        for w in (self.workload or "perception").split(","):
            if w not in WORKLOADS:
                raise ConfigError(f"unknown workload {w!r}; choose from {', '.join(WORKLOADS)}")
        paths = [self.input, self.query, self.arch, self.tech, *self.inputs, *self.queries]
        for p in paths:
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"file not found: {p}")
        if self.model is not None:
            stem = Path(self.model).with_suffix("") if Path(self.model).suffix in (".json", ".hdv") \
                else Path(self.model)
            for suffix in (".json", ".hdv"):
                if not stem.with_suffix(suffix).is_file():
                    raise ConfigError(f"checkpoint file not found: {stem.with_suffix(suffix)}")


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _coerce(name: str, value: Any) -> Any:
    """Convert a raw value (string from env/flags, or JSON value) to the field's type."""
    ftype = str(_FIELDS[name].type)
    if value is None or value == "":
        return None if "None" in ftype else value
    try:
        if ftype.startswith("list"):
            items = value.split(",") if isinstance(value, str) else list(value)
            return [str(v).strip() for v in items if str(v).strip()]
        if ftype.startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if ftype.startswith("float"):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r} as {ftype}") from None


def load_config(path: str | None = None, env: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    values: dict[str, Any] = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        unknown = set(raw) - set(_FIELDS)
        if unknown:
            raise ConfigError(f"{path}: unknown setting(s) {', '.join(sorted(unknown))}")
        values.update({k: _coerce(k, v) for k, v in raw.items()})
    env = os.environ if env is None else env
    for name in _FIELDS:
        key = ENV_PREFIX + name.upper()
        if key in env:
            values[name] = _coerce(name, env[key])
    for name, v in (overrides or {}).items():
        if v is not None:
            values[name] = _coerce(name, v)
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def _log(msg: str) -> None:
    print(f"vsaimc: {msg}", file=sys.stderr)


def _dim(cfg: ExperimentConfig, default: int = 10_000) -> int:
    return cfg.dim if cfg.dim is not None else default


def _labelled(cfg: ExperimentConfig, n_train: int = 200):
    """(X, y) from the input CSV, or seeded two-class blobs."""
    if cfg.input:
        return read_feature_csv(cfg.input, cfg.label_column)
    return make_blobs(n_train, 16, 2, seed=cfg.seed)


Result = tuple[list[dict], dict]


# ── subcommands ─────────────────────────────────────────────────────────


def cmd_encode(cfg: ExperimentConfig) -> Result:
    D = _dim(cfg)
    out = Path(cfg.out)
    if cfg.input and cfg.input.endswith(".jsonl"):
        recs = read_modal_jsonl(cfg.input)
        mods: dict[str, list[str]] = {}
        for r in recs:
            mods.setdefault(r.modality, [])
            mods[r.modality] += [f for f in sorted(r.features) if f not in mods[r.modality]]
        vals = [v for r in recs for v in r.features.values()]
        lo, hi = min(vals), max(vals)
        emb = LevelEmbedding(lo, hi if hi > lo else lo + 1.0, cfg.levels, D, cfg.seed)
        hv = multimodal_encode(recs, build_id_codebook(mods, cfg.seed, D), emb, cfg.seed)
        atomic_write(out / "encoded.hdv", pack_container({"sample": hv}))
        rows = [{"sample": "sample", "records": len(recs), "ones": int(hv.to_binary().data.sum())}]
        return rows, {"dim": D, "modalities": sorted(mods), "records": len(recs)}
    X, y = _labelled(cfg)
    enc = ProjectionEncoder(X.shape[1], D, cfg.seed, cfg.quantizer)
    H = enc.encode_batch(X)
    atomic_write(out / "encoded.hdv", pack_container(arrays={"encoded": H}))
    ones = (H > 0).sum(axis=1)
    rows = [{"index": i, "label": None if y is None else y[i], "ones": int(o)} for i, o in enumerate(ones)]
    return rows, {"dim": D, "samples": len(X), "features": X.shape[1], "repr": enc.out_repr.value}


def _model_manifest(model: ClassifierModel, enc: ProjectionEncoder) -> dict:
    return {"schema_version": 1, "classes": model.classes, "D": model.dim, "metric": model.metric.value,
            "tie_break_seed": model.tie_break_seed,
            "encoder": {"in_dim": enc.in_dim, "out_dim": enc.out_dim, "seed": enc.seed, "quantizer": enc.quantizer}}


def cmd_train(cfg: ExperimentConfig) -> Result:
    D = _dim(cfg)
    X, y = _labelled(cfg)
    if y is None:
        raise ConfigError(f"training data needs a {cfg.label_column!r} column")
    y = np.asarray(y)
    if cfg.query:
        Xte, yte = read_feature_csv(cfg.query, cfg.label_column)
    elif cfg.input:
        Xte = yte = None
    else:
        X, y, Xte, yte = train_test_split(X, y, 0.3, cfg.seed)
    enc = ProjectionEncoder(X.shape[1], D, cfg.seed, cfg.quantizer)
    base = train_single_pass(X, y, enc, tie_break_seed=cfg.seed)
    model = retrain_iterative(base, X, y, cfg.eta, cfg.epochs)
    save_checkpoint(Path(cfg.out) / "model", _model_manifest(model, enc), arrays={"accum_fixed": model.accum_fixed})

    def acc(m, A, b):
        return float(np.mean(np.asarray(predict(m, A)) == np.asarray(b)))

    summary = {"dim": D, "classes": model.classes, "train_accuracy_single_pass": acc(base, X, y),
               "train_accuracy_retrained": acc(model, X, y), "epochs_run": len(model.history)}
    if Xte is not None and yte is not None:
        summary["test_accuracy_single_pass"] = acc(base, Xte, yte)
        summary["test_accuracy_retrained"] = acc(model, Xte, yte)
    return [dict(h) for h in model.history], summary


def _load_model(stem) -> ClassifierModel:
    manifest, _, arrays = load_checkpoint(stem)
    e = manifest["encoder"]
    enc = ProjectionEncoder(e["in_dim"], e["out_dim"], e["seed"], e["quantizer"])
    return ClassifierModel(manifest["classes"], arrays["accum_fixed"], enc, manifest["metric"],
                           manifest["tie_break_seed"])


def cmd_infer(cfg: ExperimentConfig) -> Result:
    if not cfg.model:
        raise ConfigError("infer needs --model (a checkpoint written by train)")
    data = cfg.query or cfg.input
    if not data:
        raise ConfigError("infer needs --query or --input with feature rows")
    model = _load_model(cfg.model)
    X, y = read_feature_csv(data, cfg.label_column)
    Q = model.encoder.encode_batch(X)
    scores = model.scores(Q)
    idx = model.predict_encoded(Q)
    rows = [{"index": i, "predicted": model.classes[k], "score": float(scores[i, k]),
             "label": None if y is None else y[i]} for i, k in enumerate(idx)]
    summary = {"samples": len(X)}
    if y is not None:
        summary["accuracy"] = float(np.mean([r["predicted"] == r["label"] for r in rows]))
    return rows, summary


def cmd_cluster(cfg: ExperimentConfig) -> Result:
    D = _dim(cfg)
    X, y = _labelled(cfg)
    enc = ProjectionEncoder(X.shape[1], D, cfg.seed)
    m = cluster(enc.encode_batch(X), cfg.k, cfg.max_iters, cfg.seed)
    rows = [{"index": i, "cluster": int(c), "label": None if y is None else y[i]} for i, c in enumerate(m.assignments)]
    summary = {"k": cfg.k, "iterations": m.iterations, "converged": m.converged}
    if y is not None:
        summary["ari"] = adjusted_rand_index(list(y), m.assignments)
    return rows, summary


def cmd_factorize(cfg: ExperimentConfig) -> Result:
    prob = read_factorization_problem(cfg.input) if cfg.input else \
        {"codebook_sizes": [8, 8, 8], "dim": 1024, "seed": cfg.seed, "trials": 200}
    D = cfg.dim if cfg.dim is not None else prob["dim"]
    sizes = prob["codebook_sizes"]
    seed = prob.get("seed", cfg.seed)
    sched = Schedule(cfg.schedule)
    single = "target" in prob or "vector" in prob
    if single:
        books, truth, f = random_problem(len(sizes), sizes[0], D, seed)
        if "target" in prob:
            truth = [cb.symbols[int(i)] for cb, i in zip(books, prob["target"])]
            f = compose([cb[s] for cb, s in zip(books, truth)])
        else:
            f, truth = from_bits(prob["vector"], Repr.BIPOLAR), None
        problems = [(books, truth, f)]
    else:
        n = cfg.trials if cfg.trials is not None else prob["trials"]
        problems = [random_problem(len(sizes), sizes[0], D, derive_seed("factorize-trial", seed, t) % 2**31)
                    for t in range(n)]
    rows = []
    for t, (books, truth, f) in enumerate(problems):
        r = factorize(f, books, cfg.max_iters, sched, cfg.noise_p, seed)
        rows.append({"trial": t, "iterations": r.iterations, "converged": r.converged, "decoded": r.factors,
                     "truth": truth, "correct": None if truth is None else r.factors == truth,
                     "final_similarity": r.final_similarity, "flagged": r.flagged()})
    summary = {"dim": D, "codebook_sizes": sizes, "schedule": sched.value, "trials": len(rows),
               "convergence_rate": float(np.mean([r["converged"] for r in rows])),
               "mean_iterations": float(np.mean([r["iterations"] for r in rows]))}
    if all(r["correct"] is not None for r in rows):
        summary["accuracy"] = float(np.mean([r["correct"] for r in rows]))
    return rows, summary


def cmd_navigate(cfg: ExperimentConfig) -> Result:
    D = _dim(cfg)
    if cfg.input:
        demos = read_navigation_jsonl(cfg.input)
        if not demos:
            raise ConfigError(f"{cfg.input}: no demos")
        sensors = sorted({s for d in demos for s in d.sensors})
        actions: dict[str, list[str]] = {}
        for d in demos:
            for a, v in sorted(d.actuators.items()):
                actions.setdefault(a, [])
                if v not in actions[a]:
                    actions[a].append(v)
        nums = [v for d in demos for v in d.sensors.values() if not isinstance(v, str)]
        lo, hi = (min(nums), max(nums)) if nums else (0.0, 1.0)
        prog = make_navigation_program(sensors, actions, D, cfg.seed, lo, hi if hi > lo else lo + 1.0, cfg.levels,
                                       cfg.threshold)
    else:
        demos = grid_demos(20, seed=cfg.seed)
        prog = grid_program(D, cfg.seed)
        prog.threshold = cfg.threshold
    navigation_train(demos, prog)
    queries = read_navigation_jsonl(cfg.query) if cfg.query else demos
    rows = []
    for i, q in enumerate(queries):
        for a, v, score in navigation_recall(prog, q.sensors):
            rows.append({"query": i, "actuator": a, "recalled": v, "expected": q.actuators.get(a),
                         "score": score, "accepted": prog.accepts(score)})
    known = [r for r in rows if r["expected"] is not None]
    summary = {"dim": D, "demos": len(demos), "threshold": prog.recall_threshold(), "queries": len(queries)}
    if known:
        summary["recall_rate"] = float(np.mean([r["recalled"] == r["expected"] and r["accepted"] for r in known]))
    return rows, summary


def cmd_graph(cfg: ExperimentConfig) -> Result:
    D = _dim(cfg)
    edges = read_edge_list(cfg.input) if cfg.input else random_graph(50, 0.1, cfg.seed)
    gm = graph_encode(edges, cfg.seed, D)
    S = edge_scores(gm)
    nodes = gm.nodes
    truth = {frozenset(e) for e in edges}
    rows, labels, scores = [], [], []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            a, b = nodes[i], nodes[j]
            thr = cfg.threshold if cfg.threshold is not None else edge_threshold(gm, a, b)
            edge = frozenset((a, b)) in truth
            rows.append({"i": a, "j": b, "score": float(S[i, j]), "predicted": bool(S[i, j] >= thr), "edge": edge})
            labels.append(edge)
            scores.append(S[i, j])
    summary = {"dim": D, "nodes": len(nodes), "edges": len(truth),
               "accuracy": float(np.mean([r["predicted"] == r["edge"] for r in rows])) if rows else None}
    if rows and 0 < sum(labels) < len(labels):
        summary["auc"] = rank_auc(labels, scores)
    return rows, summary


def cmd_ood(cfg: ExperimentConfig) -> Result:
    D = _dim(cfg)
    thr = cfg.threshold if cfg.threshold is not None else 0.25
    if cfg.inputs:
        train, y = read_layer_csvs(cfg.inputs, cfg.label_column)
        if y is None:
            raise ConfigError(f"first layer file needs a {cfg.label_column!r} column")
        queries, truth = (read_layer_csvs(cfg.queries, cfg.label_column)[0], None) if cfg.queries else (train, None)
    else:
        train, y = layered_features(300, seed=cfg.seed)
        qin, _ = layered_features(100, seed=cfg.seed, draw=1)
        qout, _ = layered_features(100, seed=cfg.seed, shifted=True, draw=1)
        queries = [np.vstack([a, b]) for a, b in zip(qin, qout)]
        truth = [False] * 100 + [True] * 100
    desc = hdff_fit(train, y, dim=D, seed=cfg.seed, threshold=thr)
    scores, nearest = hdff_scores(queries, desc)
    rows = [{"index": i, "score": float(s), "nearest": c, "ood": bool(s < thr),
             "shifted": None if truth is None else truth[i]} for i, (s, c) in enumerate(zip(scores, nearest))]
    summary = {"dim": D, "layers": len(train), "threshold": thr, "queries": len(rows),
               "flagged": int(sum(r["ood"] for r in rows))}
    if truth is not None:
        summary["auc"] = rank_auc([not t for t in truth], scores)
    return rows, summary


def make_workload(name: str, dim: int = 10_000, seed: int = 0):
    return {
        "perception": lambda: PerceptionWorkload(dim=dim, seed=seed),
        "navigation": lambda: NavigationWorkload(dim=dim, seed=seed),
        "navigation-recall": lambda: NavigationWorkload(dim=dim, seed=seed, phase="recall"),
        "factorization": lambda: FactorizationWorkload(dim=dim, seed=seed),
        "classification": lambda: ClassificationWorkload(dim=dim, seed=seed),
    }[name]()


def _architecture(cfg: ExperimentConfig) -> Architecture:
    if not cfg.arch:
        return Architecture()
    try:
        raw = json.loads(Path(cfg.arch).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{cfg.arch}: invalid JSON ({exc.msg})") from None
    try:
        return Architecture.from_dict(raw)
    except (VSAError, ValueError, TypeError) as exc:
        raise ConfigError(f"{cfg.arch}: {exc}") from None


def cmd_cost(cfg: ExperimentConfig) -> Result:
    arch = _architecture(cfg)
    techs = load_tech_table(cfg.tech)
    w = make_workload((cfg.workload or "perception").split(",")[0], _dim(cfg), cfg.seed)
    node = cfg.nodes[0]
    row = evaluate(w, arch, node, techs)
    mapping = map_workload(w, arch)
    report = estimate_cost(trace_workload(w, mapping), mapping, techs.at_node(node))
    return [row], {"workload": w.name, "node": row["node"], "architecture": arch.to_dict(), **report.to_dict()}


def cmd_sweep(cfg: ExperimentConfig) -> Result:
    names = cfg.workload.split(",") if cfg.workload else ["perception", "navigation", "factorization"]
    techs = load_tech_table(cfg.tech)
    ws = [make_workload(n, _dim(cfg), cfg.seed) for n in names]
    rows = run_sweep(ws, DEFAULT_CONFIGS, cfg.nodes, cfg.jobs, techs)
    return rows, {"baseline": "RRAM", "configs": [a.name for a in DEFAULT_CONFIGS], "workloads": names,
                  "nodes": cfg.nodes}


def cmd_bounds(cfg: ExperimentConfig) -> Result:
    D = _dim(cfg)
    return bounds_table(D), {"dim": D}


HANDLERS: dict[str, Callable[[ExperimentConfig], Result]] = {
    "encode": cmd_encode, "train": cmd_train, "infer": cmd_infer, "cluster": cmd_cluster,
    "factorize": cmd_factorize, "navigate": cmd_navigate, "graph": cmd_graph, "ood": cmd_ood,
    "cost": cmd_cost, "sweep": cmd_sweep, "bounds": cmd_bounds,
}

HELP = {
    "encode": "encode a feature CSV (random projection) or modal JSON-lines (ID-level fusion)",
    "train": "train a classifier (single pass plus retraining) and save a checkpoint",
    "infer": "classify feature rows with a saved checkpoint",
    "cluster": "k-means clustering over encoded samples",
    "factorize": "resonator factorization of composites (default: 200 random 3x8 problems at D=1024)",
    "navigate": "learn a reactive program from demos and recall actions",
    "graph": "encode an edge list and score every node pair",
    "ood": "layer-feature out-of-distribution scoring",
    "cost": "single energy/latency/area estimate for one workload and architecture",
    "sweep": "memory technology x workload x node sweep normalized to all-RRAM",
    "bounds": "analytical footprint bounds per workload category",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="JSON file of settings")
    g.add_argument("--seed", help="seed threaded to every module")
    g.add_argument("--jobs", help="parallel sweep cells")
    g.add_argument("--out", help="output directory")
    g.add_argument("--format", choices=("csv", "json"), help="report format")
    g.add_argument("--dim", help="hypervector dimensionality")
    g.add_argument("--input", help="input dataset file")
    g.add_argument("--inputs", help="comma-separated per-layer CSVs")
    g.add_argument("--query", help="query dataset file")
    g.add_argument("--queries", help="comma-separated per-layer query CSVs")
    g.add_argument("--label-column", dest="label_column")
    g.add_argument("--model", help="checkpoint stem")
    g.add_argument("--levels")
    g.add_argument("--quantizer", choices=("sign", "threshold"))
    g.add_argument("--eta")
    g.add_argument("--epochs")
    g.add_argument("--k")
    g.add_argument("--schedule", choices=("parallel", "sequential"))
    g.add_argument("--max-iters", dest="max_iters")
    g.add_argument("--noise-p", dest="noise_p")
    g.add_argument("--trials")
    g.add_argument("--threshold")
    g.add_argument("--workload", help=f"one of {', '.join(WORKLOADS)} (comma-separated for sweep)")
    g.add_argument("--arch", help="architecture JSON")
    g.add_argument("--tech", help="technology table JSON")
    g.add_argument("--nodes", help="comma-separated technology nodes: 65, 40_45, 22")
    p = argparse.ArgumentParser(prog="vsaimc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name])
    return p


def _file_ref(path: str) -> dict:
    p = Path(path)
    if not p.is_file():  # checkpoint stems name two files
        return {"name": p.name, "sha256": {sfx: _file_ref(str(p.with_suffix(sfx)))["sha256"]
                                           for sfx in (".json", ".hdv")}}
    return {"name": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()}


def _echo(cfg: ExperimentConfig) -> dict:
    """Settings as recorded in reports: files by name and content digest, so a report depends on
    what was read rather than where it lived. Output location and parallelism are left out."""
    out = {}
    for k, v in asdict(cfg).items():
        if k in ("out", "jobs"):
            continue
        if k in ("input", "query", "model", "arch", "tech") and v is not None:
            v = _file_ref(v)
        elif k in ("inputs", "queries"):
            v = [_file_ref(x) for x in v]
        out[k] = v
    return out


def run(argv: Sequence[str] | None = None, env: dict | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {k: v for k, v in vars(args).items() if k in _FIELDS}
    env = dict(os.environ) if env is None else env
    try:
        if args.config is None and ENV_PREFIX + "CONFIG" in env:
            args.config = env[ENV_PREFIX + "CONFIG"]
        cfg = load_config(args.config, env, overrides)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return 2
    try:
        rows, summary = HANDLERS[args.command](cfg)
        echo = _echo(cfg)
        paths = write_report(cfg.out, args.command, rows, cfg.format, summary, echo)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return 2
    except (VSAError, OSError, ValueError, KeyError) as exc:
        _log(f"{args.command} failed: {type(exc).__name__}: {exc}")
        return 1
    for path in paths:
        _log(f"wrote {path}")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
