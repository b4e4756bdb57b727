"""Dataset readers and report writers used by the command-line runner."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .cognition import Demo
from .encoders import ModalRecord
from .errors import FormatError
from .serialize import atomic_write

SCHEMA_VERSION = 1


def _label(v: str):
    try:
        return int(v)
    except ValueError:
        return v


def read_feature_csv(path, label_column: str | None = "label") -> tuple[np.ndarray, list | None]:
    """One sample per row. Every column except ``label_column`` is a numeric feature.

    Returns (n x f float array, labels or None when the column is absent).
    """
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise FormatError(f"{path}: no data rows")
    cols = list(rows[0])
    feats = [c for c in cols if c != label_column]
    if not feats:
        raise FormatError(f"{path}: no feature columns")
    try:
        X = np.array([[float(r[c]) for c in feats] for r in rows])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: non-numeric feature value ({exc})") from None
    labels = [_label(r[label_column]) for r in rows] if label_column in cols else None
    return X, labels


def _jsonl(path) -> Iterable[tuple[int, dict]]:
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if line.strip():
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise FormatError(f"{path}:{n}: {exc.msg}") from None
                if not isinstance(obj, dict):
                    raise FormatError(f"{path}:{n}: expected a JSON object")
                yield n, obj


def read_modal_jsonl(path) -> list[ModalRecord]:
    """Lines of ``{"modality": str, "t": int, "features": {id: value}}``."""
    out = []
    for n, obj in _jsonl(path):
        try:
            out.append(ModalRecord(str(obj["modality"]), {str(k): float(v) for k, v in obj["features"].items()},
                                   int(obj.get("t", 0))))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"{path}:{n}: bad modal record ({exc})") from None
    return out


def read_navigation_jsonl(path) -> list[Demo]:
    """Lines of ``{"sensors": {id: value}, "actuators": {id: value}}``; numeric readings stay numeric."""
    out = []
    for n, obj in _jsonl(path):
        try:
            sensors = {str(k): (v if isinstance(v, (int, float)) and not isinstance(v, bool) else str(v))
                       for k, v in obj["sensors"].items()}
            out.append(Demo(sensors, {str(k): str(v) for k, v in obj["actuators"].items()}))
        except (KeyError, AttributeError) as exc:
            raise FormatError(f"{path}:{n}: bad demo ({exc})") from None
    return out


def read_edge_list(path) -> list[tuple[str, str]]:
    """Whitespace- or comma-separated node pairs, one per line; ``#`` starts a comment."""
    edges = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].replace(",", " ").split()
            if not line:
                continue
            if len(line) != 2:
                raise FormatError(f"{path}:{n}: expected two node ids, got {len(line)} fields")
            edges.append((line[0], line[1]))
    return edges


def read_layer_csvs(paths: Sequence, label_column: str | None = "label") -> tuple[list[np.ndarray], list | None]:
    """One CSV per network layer, rows aligned across files; labels come from the first file."""
    if not paths:
        raise FormatError("no layer files given")
    layers, labels = [], None
    for i, p in enumerate(paths):
        X, y = read_feature_csv(p, label_column)
        if layers and len(X) != len(layers[0]):
            raise FormatError(f"{p}: {len(X)} rows, expected {len(layers[0])}")
        layers.append(X)
        if i == 0:
            labels = y
    return layers, labels


FACTOR_DEFAULTS = {"codebook_sizes": [8, 8, 8], "dim": 1024, "seed": 0, "trials": 200}


def read_factorization_problem(path) -> dict:
    """JSON object with ``codebook_sizes``, ``dim``, ``seed`` and either ``trials`` (random
    compositions), ``target`` (one item index per codebook) or ``vector`` (a bit string)."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise FormatError(f"{path}: expected a JSON object")
    prob = {**FACTOR_DEFAULTS, **obj}
    sizes = prob["codebook_sizes"]
    if not sizes or len(set(sizes)) != 1:
        raise FormatError("codebook_sizes must be a non-empty list of equal sizes")
    if "target" in obj and len(obj["target"]) != len(sizes):
        raise FormatError("target needs one index per codebook")
    if "vector" in obj and len(obj["vector"]) != prob["dim"]:
        raise FormatError("vector length must equal dim")
    return prob


# ── reports ─────────────────────────────────────────────────────────────


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, np.ndarray):
        return v.tolist()
    if hasattr(v, "value") and not isinstance(v, (int, float, str)):
        return v.value
    return v


def _clean(obj):
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _plain(obj)


def report_json(command: str, rows: Sequence[Mapping], summary: Mapping | None = None,
                config: Mapping | None = None) -> str:
    payload = {"schema_version": SCHEMA_VERSION, "command": command, "config": config or {},
               "summary": summary or {}, "rows": list(rows)}
    return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"


def report_csv(rows: Sequence[Mapping]) -> str:
    """Rows as CSV with a leading schema_version column; lists are joined with ``|``."""
    rows = [_clean(r) for r in rows]
    fields: list[str] = []
    for r in rows:
        fields += [k for k in r if k not in fields]
    buf = io.StringIO()
    w = csv.DictWriter(buf, ["schema_version"] + fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({"schema_version": SCHEMA_VERSION,
                    **{k: "|".join(map(str, v)) if isinstance(v, list) else ("" if v is None else v)
                       for k, v in r.items()}})
    return buf.getvalue()


def write_report(out_dir, command: str, rows: Sequence[Mapping], fmt: str = "csv",
                 summary: Mapping | None = None, config: Mapping | None = None) -> list[Path]:
    """Write ``<command>.<fmt>`` (and ``<command>_summary.json`` alongside CSV when there is a summary)."""
    out_dir = Path(out_dir)
    paths = []
    if fmt == "json":
        p = out_dir / f"{command}.json"
        atomic_write(p, report_json(command, rows, summary, config))
        paths.append(p)
    elif fmt == "csv":
        p = out_dir / f"{command}.csv"
        atomic_write(p, report_csv(rows))
        paths.append(p)
        if summary:
            s = out_dir / f"{command}_summary.json"
            atomic_write(s, report_json(command, [], summary, config))
            paths.append(s)
    else:
        raise FormatError(f"unknown report format {fmt!r}")
    return paths


def write_csv_features(path, X, labels=None, label_column: str = "label") -> None:
    """Inverse of ``read_feature_csv`` (used to export synthetic datasets)."""
    X = np.asarray(X)
    rows = []
    for i, x in enumerate(X):
        r: dict[str, Any] = {f"f{j}": repr(float(v)) for j, v in enumerate(x)}
        if labels is not None:
            r[label_column] = labels[i]
        rows.append(r)
    buf = io.StringIO()
    w = csv.DictWriter(buf, list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    atomic_write(path, buf.getvalue())
