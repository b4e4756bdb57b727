"""Binary container and JSON forms for hypervectors.

Single-vector blob layout (little-endian)::

    magic  b"HDV1"
    dim    uint32
    repr   uint8    0 binary, 1 bipolar, 2 int
    width  uint8
    seeded uint8    1 if the seed field is meaningful
    seed   int64
    payload         packed bits (binary/bipolar) or int{8,16,32,64} values

A multi-record container (``b"HDVC"``) holds named vector blobs and named
``.npy`` arrays; checkpoints pair it with a JSON manifest.
"""

from __future__ import annotations

import io
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import FormatError
from .hdvec import HyperVector, Repr

_HEADER = struct.Struct("<4sIBBBq")
_MAGIC = b"HDV1"
_CMAGIC = b"HDVC"
_REPR_CODE = {Repr.BINARY: 0, Repr.BIPOLAR: 1, Repr.INT: 2}
_CODE_REPR = {v: k for k, v in _REPR_CODE.items()}


def _int_dtype(width: int) -> np.dtype:
    for bits, dt in ((8, "<i1"), (16, "<i2"), (32, "<i4")):
        if width <= bits:
            return np.dtype(dt)
    return np.dtype("<i8")


def encode_vector(hv: HyperVector, seed: int | None = None) -> bytes:
    head = _HEADER.pack(_MAGIC, hv.dim, _REPR_CODE[hv.repr], hv.width, seed is not None, seed or 0)
    if hv.repr is Repr.INT:
        payload = hv.data.astype(_int_dtype(hv.width)).tobytes()
    else:
        payload = np.packbits(hv.as_bipolar_array() > 0, bitorder="little").tobytes()
    return head + payload


def decode_vector(buf: bytes) -> tuple[HyperVector, int | None]:
    if len(buf) < _HEADER.size:
        raise FormatError("truncated hypervector header")
    magic, dim, code, width, seeded, seed = _HEADER.unpack_from(buf)
    if magic != _MAGIC or code not in _CODE_REPR:
        raise FormatError("not a hypervector blob")
    rep = _CODE_REPR[code]
    body = buf[_HEADER.size:]
    if rep is Repr.INT:
        dt = _int_dtype(width)
        if len(body) != dim * dt.itemsize:
            raise FormatError("payload length does not match header")
        data = np.frombuffer(body, dtype=dt).astype(np.int64)
        hv = HyperVector(data, Repr.INT, width)
    else:
        if len(body) != (dim + 7) // 8:
            raise FormatError("payload length does not match header")
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8), count=dim, bitorder="little")
        hv = HyperVector(bits.astype(np.int8), Repr.BINARY).to_repr(rep)
    return hv, (seed if seeded else None)


def vector_to_json(hv: HyperVector) -> dict[str, Any]:
    return {"dim": hv.dim, "repr": hv.repr.value, "width": hv.width, "data": hv.data.tolist()}


def vector_from_json(obj: Mapping[str, Any]) -> HyperVector:
    try:
        hv = HyperVector(np.asarray(obj["data"]), Repr(obj["repr"]), int(obj.get("width", 1)))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad hypervector JSON: {exc}") from exc
    if hv.dim != int(obj["dim"]):
        raise FormatError("JSON dim does not match data length")
    return hv


def pack_container(vectors: Mapping[str, HyperVector] = {}, arrays: Mapping[str, np.ndarray] = {}) -> bytes:
    out = io.BytesIO()
    out.write(_CMAGIC)
    out.write(struct.pack("<I", len(vectors) + len(arrays)))
    records = [(b"V", k, encode_vector(v)) for k, v in vectors.items()]
    for k, a in arrays.items():
        buf = io.BytesIO()
        np.save(buf, np.ascontiguousarray(a), allow_pickle=False)
        records.append((b"A", k, buf.getvalue()))
    for kind, name, blob in records:
        nb = name.encode()
        out.write(kind)
        out.write(struct.pack("<H", len(nb)))
        out.write(nb)
        out.write(struct.pack("<Q", len(blob)))
        out.write(blob)
    return out.getvalue()


def unpack_container(buf: bytes) -> tuple[dict[str, HyperVector], dict[str, np.ndarray]]:
    if buf[:4] != _CMAGIC:
        raise FormatError("not a hypervector container")
    (count,) = struct.unpack_from("<I", buf, 4)
    pos = 8
    vectors: dict[str, HyperVector] = {}
    arrays: dict[str, np.ndarray] = {}
    try:
        for _ in range(count):
            kind = buf[pos:pos + 1]
            (nlen,) = struct.unpack_from("<H", buf, pos + 1)
            name = buf[pos + 3:pos + 3 + nlen].decode()
            pos += 3 + nlen
            (blen,) = struct.unpack_from("<Q", buf, pos)
            pos += 8
            blob = buf[pos:pos + blen]
            pos += blen
            if kind == b"V":
                vectors[name] = decode_vector(blob)[0]
            elif kind == b"A":
                arrays[name] = np.load(io.BytesIO(blob), allow_pickle=False)
            else:
                raise FormatError(f"unknown record kind {kind!r}")
    except struct.error as exc:
        raise FormatError("truncated container") from exc
    return vectors, arrays


def atomic_write(path: str | os.PathLike, data: bytes | str) -> None:
    """Write via a temp file in the same directory and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(stem: str | os.PathLike, manifest: Mapping[str, Any],
                    vectors: Mapping[str, HyperVector] = {}, arrays: Mapping[str, np.ndarray] = {}) -> tuple[Path, Path]:
    """Write ``<stem>.hdv`` (container) and ``<stem>.json`` (manifest)."""
    stem = Path(stem)
    blob_path, man_path = stem.with_suffix(".hdv"), stem.with_suffix(".json")
    atomic_write(blob_path, pack_container(vectors, arrays))
    atomic_write(man_path, json.dumps(dict(manifest), indent=2, sort_keys=True) + "\n")
    return blob_path, man_path


def load_checkpoint(stem: str | os.PathLike) -> tuple[dict, dict[str, HyperVector], dict[str, np.ndarray]]:
    stem = Path(stem)
    if stem.suffix in (".hdv", ".json"):
        stem = stem.with_suffix("")
    manifest = json.loads(stem.with_suffix(".json").read_text())
    vectors, arrays = unpack_container(stem.with_suffix(".hdv").read_bytes())
    return manifest, vectors, arrays
