"""Row-aligned embedding matrices with exact cosine retrieval.

Binary layout (little-endian): magic b"EMB1", uint32 count, uint32 dim, then
count*dim float32 row-major. A companion text file holds one id per row.

Vectors are L2-normalized once at load; every similarity afterwards is a plain
dot product. All queries are exact full scans — the cascade only embeds
mispredicted images, so brute force stays cheap and keeps results reproducible.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyIndex,
    MissingTextEmbedding,
    ParseError,
    ValidationError,
)

MAGIC = b"EMB1"


@dataclass(frozen=True)
class Neighbor:
    id: str
    similarity: float


class EmbeddingMatrix:
    """Immutable id-indexed matrix of unit vectors."""

    def __init__(self, ids: list[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ValidationError("embedding matrix must be 2-D")
        if len(ids) != vectors.shape[0]:
            raise ValidationError(f"{len(ids)} ids for {vectors.shape[0]} rows")
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate ids in embedding matrix")
        if not np.all(np.isfinite(vectors)):
            raise ValidationError("embedding matrix contains NaN/Inf")
        v64 = vectors.astype(np.float64)
        norms = np.linalg.norm(v64, axis=1)
        if vectors.shape[0] and not np.all(norms > 0):
            raise ValidationError("zero-norm embedding row")
        self.ids: list[str] = list(ids)
        self.dim: int = int(vectors.shape[1])
        # normalized in float64; the float32 layout is a storage format only
        self.unit_vectors: np.ndarray = v64 / norms[:, None] if vectors.shape[0] else v64
        self.unit_vectors.setflags(write=False)
        self._row_of: dict[str, int] = {sid: i for i, sid in enumerate(ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, sid: str) -> bool:
        return sid in self._row_of

    def vector(self, sid: str) -> np.ndarray:
        return self.unit_vectors[self._row_of[sid]]

    def row_of(self, sid: str) -> int:
        return self._row_of[sid]


def write_embeddings(bin_path: str | Path, ids_path: str | Path, ids: list[str], vectors: np.ndarray) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or vectors.shape[0] != len(ids):
        raise ValidationError("vectors must be (len(ids), dim)")
    with open(bin_path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", vectors.shape[0], vectors.shape[1]))
        f.write(vectors.tobytes(order="C"))
    with open(ids_path, "w", encoding="utf-8", newline="\n") as f:
        for sid in ids:
            f.write(sid + "\n")


def read_embeddings(bin_path: str | Path, ids_path: str | Path) -> EmbeddingMatrix:
    bin_path, ids_path = Path(bin_path), Path(ids_path)
    try:
        raw = bin_path.read_bytes()
    except OSError as e:
        raise ParseError(f"{bin_path}: {e}") from e
    if raw[:4] != MAGIC:
        raise ParseError(f"{bin_path}: bad magic {raw[:4]!r}")
    if len(raw) < 12:
        raise ParseError(f"{bin_path}: truncated header")
    n, d = struct.unpack("<II", raw[4:12])
    expected = 12 + 4 * n * d
    if len(raw) != expected:
        raise ParseError(f"{bin_path}: size {len(raw)} != expected {expected} for {n}x{d}")
    vectors = np.frombuffer(raw, dtype="<f4", offset=12).reshape(n, d)
    try:
        with open(ids_path, encoding="utf-8") as f:
            ids = [line.rstrip("\n") for line in f]
    except OSError as e:
        raise ParseError(f"{ids_path}: {e}") from e
    ids = [i for i in ids if i]
    if len(ids) != n:
        raise ParseError(f"{ids_path}: {len(ids)} ids for {n} rows")
    return EmbeddingMatrix(ids, vectors.copy())


def _normalize_query(query: np.ndarray, dim: int) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != dim:
        raise DimensionMismatch(f"query dim {q.shape[0]} != index dim {dim}")
    norm = np.linalg.norm(q)
    if not np.isfinite(norm) or norm == 0:
        raise ValidationError("query vector must be finite and non-zero")
    return q / norm


def knn(query: np.ndarray, index: EmbeddingMatrix, k: int) -> list[Neighbor]:
    """Exact top-k by cosine similarity, ties broken by ascending row index."""
    if len(index) == 0:
        raise EmptyIndex("cannot query an empty embedding matrix")
    if not 1 <= k <= len(index):
        raise ValueError(f"k={k} out of range for index of size {len(index)}")
    q = _normalize_query(query, index.dim)
    sims = index.unit_vectors @ q
    # stable sort on descending similarity keeps ascending row order for ties
    order = np.argsort(-sims, kind="stable")[:k]
    return [Neighbor(id=index.ids[i], similarity=float(sims[i])) for i in order]


def knn_batch(queries: np.ndarray, index: EmbeddingMatrix, k: int) -> list[list[Neighbor]]:
    """Vectorized batch form of knn; result order matches sequential calls."""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2:
        raise DimensionMismatch("batch queries must be 2-D")
    return [knn(q, index, k) for q in queries]


def score_proposals(
    image_emb: np.ndarray,
    proposals: set[str],
    label_text_index: EmbeddingMatrix,
) -> tuple[str, dict[str, float]]:
    """Cosine-score each proposal's text embedding against the image embedding.

    Returns the argmax (ties resolved toward the lexicographically smallest
    synset id) and the full score map.
    """
    if not proposals:
        raise ValueError("no proposals to score")
    missing = sorted(p for p in proposals if p not in label_text_index)
    if missing:
        raise MissingTextEmbedding(f"no text embedding for: {', '.join(missing)}")
    q = _normalize_query(image_emb, label_text_index.dim)
    scores = {p: float(label_text_index.vector(p) @ q) for p in proposals}
    best = min(scores, key=lambda p: (-scores[p], p))
    return best, scores
