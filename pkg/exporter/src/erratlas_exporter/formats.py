"""Writers for the engine's external file formats.

Implemented from the documented formats, not by importing the engine: EMB1 is
magic "EMB1" + little-endian uint32 count/dim + float32 row-major, with a
row-aligned ids text file; CSVs are plain UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"


def write_emb1(bin_path: Path, ids_path: Path, ids: list[str], vectors: np.ndarray) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    assert vectors.ndim == 2 and vectors.shape[0] == len(ids)
    with open(bin_path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", vectors.shape[0], vectors.shape[1]))
        f.write(vectors.tobytes(order="C"))
    with open(ids_path, "w", encoding="utf-8", newline="\n") as f:
        for row_id in ids:
            f.write(row_id + "\n")


def write_csv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        for row in rows:
            w.writerow(row)


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=1, sort_keys=True)
        f.write("\n")


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
