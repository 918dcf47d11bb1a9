"""Grid dumps (CSV and length-prefixed binary) and JSON run manifests."""
from __future__ import annotations

import csv
import json
import os
import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<Q")


def write_grid_csv(path, values: np.ndarray, L: float = 1.0) -> None:
    """Write ``index, x, value`` rows (1D) or ``i0, i1, x0, x1, value`` rows (2D).

    ``x`` is the grid coordinate ``index * L / M`` with ``M`` points per axis.
    """
    values = np.asarray(values, dtype=float)
    M = values.shape[0]
    h = L / M
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if values.ndim == 1:
            w.writerow(["index", "x", "value"])
            for i, v in enumerate(values):
                w.writerow([i, repr(i * h), repr(float(v))])
        elif values.ndim == 2:
            w.writerow(["i0", "i1", "x0", "x1", "value"])
            for i0 in range(M):
                for i1 in range(values.shape[1]):
                    w.writerow([i0, i1, repr(i0 * h), repr(i1 * h), repr(float(values[i0, i1]))])
        else:
            raise ValueError(f"expected a 1D or 2D grid, got shape {values.shape}")


def read_grid_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return np.zeros(0)
    if "index" in rows[0]:
        return np.array([float(r["value"]) for r in rows])
    M0 = max(int(r["i0"]) for r in rows) + 1
    M1 = max(int(r["i1"]) for r in rows) + 1
    out = np.zeros((M0, M1))
    for r in rows:
        out[int(r["i0"]), int(r["i1"])] = float(r["value"])
    return out


def write_binary(path, values: np.ndarray) -> None:
    """Little-endian float64 payload after a little-endian uint64 element count."""
    flat = np.ascontiguousarray(np.ravel(values), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(flat.size))
        fh.write(flat.tobytes())


def read_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        (count,) = _HEADER.unpack(head)
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != count:
        raise ValueError(f"{path}: header says {count} values, found {data.size}")
    return data.astype(float)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
