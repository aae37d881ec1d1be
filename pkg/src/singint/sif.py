"""SIF1 binary field files and CSV exports.

A SIF1 file is one JSON header line followed by little-endian float64
samples, interleaved (re, im), in row-major order::

    {"magic":"SIF1","n":2,"sizes":[128,128],"period":6.28...,"dtype":"c128"}\\n
    <re0 im0 re1 im1 ...>

Extra header keys (``"kind"``, ``"a"`` for symbols, provenance notes) are
preserved on read.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import ValidationError
from .fields import Field, GridSpec

MAGIC = "SIF1"


def _header(grid, extra=None):
    head = {"magic": MAGIC, "n": grid.n, "sizes": list(grid.sizes), "period": grid.period, "dtype": "c128"}
    if extra:
        for k, v in extra.items():
            if k in head:
                raise ValueError(f"header key {k!r} is reserved")
            head[k] = v
    return head


def dumps_field(f: Field, extra=None) -> bytes:
    head = json.dumps(_header(f.grid, extra), separators=(",", ":"))
    body = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    return head.encode("utf-8") + b"\n" + body


def loads_field(data: bytes):
    """Parse SIF1 bytes; returns ``(field, header)``."""
    nl = data.find(b"\n")
    if nl < 0:
        raise ValidationError("SIF1 header is not newline-terminated")
    try:
        head = json.loads(data[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed SIF1 header: {exc}") from exc
    if head.get("magic") != MAGIC:
        raise ValidationError(f"bad magic {head.get('magic')!r}")
    if head.get("dtype", "c128") != "c128":
        raise ValidationError(f"unsupported dtype {head.get('dtype')!r}")
    grid = GridSpec(int(head["n"]), tuple(head["sizes"]), float(head["period"]))
    body = data[nl + 1:]
    if len(body) != 16 * grid.npoints:
        raise ValidationError(f"expected {16 * grid.npoints} payload bytes, found {len(body)}")
    values = np.frombuffer(body, dtype="<c16").reshape(grid.sizes)
    return Field(grid, values), head


def write_field(path, f: Field, extra=None):
    with open(path, "wb") as fh:
        fh.write(dumps_field(f, extra))


def read_field(path):
    with open(path, "rb") as fh:
        return loads_field(fh.read())


def write_csv(path, f: Field):
    """One row per lattice point: index coordinates, re, im (n <= 2 only)."""
    if f.grid.n > 2:
        raise ValueError("CSV export is limited to n <= 2")
    idx = np.indices(f.grid.sizes).reshape(f.grid.n, -1).T
    vals = f.values.ravel()
    cols = ["i", "j"][: f.grid.n]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols + ["re", "im"])
        for ij, v in zip(idx, vals):
            w.writerow([*map(int, ij), repr(float(v.real)), repr(float(v.imag))])


def read_csv(path, grid):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(complex(float(row["re"]), float(row["im"])))
    return Field(grid, np.array(rows))
