"""Matrix and family serialisation.

Binary layout: 8-byte magic ``b"CUNTZMAT"``, little-endian uint64 rows and
cols (24 bytes in all), then row-major little-endian complex128 entries.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"CUNTZMAT"
HEADER = struct.Struct("<8sQQ")
CSV_MAX_ENTRIES = 1 << 16


class FormatError(ValueError):
    pass


def _dense(X) -> np.ndarray:
    if hasattr(X, "to_numpy"):
        X = X.to_numpy()
    X = np.asarray(X, dtype="<c16")
    if X.ndim != 2:
        raise FormatError("only 2-D matrices are exported")
    return X


def dumps_matrix(X) -> bytes:
    X = _dense(X)
    return HEADER.pack(MAGIC, X.shape[0], X.shape[1]) + np.ascontiguousarray(X).tobytes()


def loads_matrix(data: bytes) -> np.ndarray:
    if len(data) < HEADER.size:
        raise FormatError("truncated header")
    magic, rows, cols = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    body = data[HEADER.size :]
    if len(body) != rows * cols * 16:
        raise FormatError(f"expected {rows * cols * 16} payload bytes, got {len(body)}")
    return np.frombuffer(body, dtype="<c16").reshape(rows, cols).astype(complex)


def write_matrix(path, X) -> Path:
    path = Path(path)
    path.write_bytes(dumps_matrix(X))
    return path


def read_matrix(path) -> np.ndarray:
    return loads_matrix(Path(path).read_bytes())


def matrix_to_csv(X) -> str:
    """``re,im`` pairs per entry, one matrix row per line."""
    X = _dense(X)
    if X.size > CSV_MAX_ENTRIES:
        raise FormatError(f"CSV export is for small matrices (<= {CSV_MAX_ENTRIES} entries)")
    buf = io.StringIO()
    for row in X:
        buf.write(",".join(f"{z.real!r},{z.imag!r}" for z in row.tolist()))
        buf.write("\n")
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        vals = [float(v) for v in line.split(",")]
        if len(vals) % 2:
            raise FormatError("odd number of fields in CSV row")
        rows.append([complex(a, b) for a, b in zip(vals[::2], vals[1::2])])
    return np.array(rows, dtype=complex)


def family_metadata(family, *, tolerances: dict | None = None, seed: int | None = None) -> dict:
    return {
        "route": family.route.value,
        "system": family.system.kind.value,
        "N": family.N,
        "exact": family.exact,
        "domain": family.basis_in.describe(),
        "codomain": family.basis_out.describe(),
        "defects": {k: v for k, v in family.defects.items()},
        "tolerances": tolerances or {},
        "seed": seed,
        "isometries": [f"S_{i + 1}.bin" for i in range(family.N)],
    }


def write_family(directory, family, *, tolerances: dict | None = None, seed: int | None = None) -> Path:
    """One binary matrix per isometry plus ``family.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, S in enumerate(family.isometries):
        write_matrix(directory / f"S_{i + 1}.bin", S.entries)
    meta = family_metadata(family, tolerances=tolerances, seed=seed)
    (directory / "family.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return directory
