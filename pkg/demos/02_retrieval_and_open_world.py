"""Exact cosine retrieval and open-world proposal scoring on toy vectors.

Run: python demos/02_retrieval_and_open_world.py
"""

import numpy as np

from erratlas import EmbeddingMatrix, knn, score_proposals

rng = np.random.default_rng(0)

# ---------------------------------------------------------------------------
# A small "training set": 3 clusters of 5 vectors each.
# ---------------------------------------------------------------------------
dim = 12
centers = np.eye(dim)[:3]
ids, rows = [], []
for c, center in enumerate(centers):
    for j in range(5):
        ids.append(f"cluster{c}_img{j}")
        rows.append(center + 0.05 * rng.standard_normal(dim))
index = EmbeddingMatrix(ids, np.array(rows, dtype=np.float32))

query = centers[1] + 0.05 * rng.standard_normal(dim)
print("top-5 neighbors of a cluster-1 query:")
for nb in knn(query, index, 5):
    print(f"  {nb.id:18s} cos={nb.similarity:.4f}")

# retrieval only depends on direction, never on vector length
big = [nb.id for nb in knn(1000.0 * query, index, 5)]
assert big == [nb.id for nb in knn(query, index, 5)]
print("scale invariance holds:", big == [nb.id for nb in knn(query, index, 5)])

# ---------------------------------------------------------------------------
# Open-world scoring: the proposal whose text embedding points closest to the
# image decides the out-of-vocabulary verdict.
# ---------------------------------------------------------------------------
proposals = ["n00000001", "n00000002", "w00000009"]  # two in-vocab ids, one not
text = EmbeddingMatrix(
    proposals,
    np.array([centers[0], centers[2], centers[1]], dtype=np.float32),  # w00000009 matches
)
best, scores = score_proposals(query, set(proposals), text)
print("\nproposal scores:")
for sid in sorted(scores, key=scores.get, reverse=True):
    print(f"  {sid}  {scores[sid]:+.4f}")
print("winner:", best, "(an id outside the class vocabulary -> OOV verdict)")
