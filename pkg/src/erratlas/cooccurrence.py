"""Mining of spurious-correlation candidate pairs from full-set multi-labels.

Every image with two or more labels contributes all unordered label pairs.
Pairs that occur in only one image, or whose members share a superclass, are
filtered out; what survives indicates a spurious correlation when it links a
wrong prediction to a ground-truth label.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .errors import ParseError, UnknownSynset
from .label_space import LabelSpace, shares_superclass


@dataclass(frozen=True)
class PairExtraction:
    raw_pair_count: int
    multi_label_image_count: int
    pairs: dict[tuple[str, str], int]
    missing_excluded: int  # excluded ids that never appeared in the label file

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self.pairs

    @classmethod
    def empty(cls) -> "PairExtraction":
        return cls(raw_pair_count=0, multi_label_image_count=0, pairs={}, missing_excluded=0)


def extract_pairs(
    real_labels: dict[str, frozenset[str]],
    excluded: set[str],
    space: LabelSpace,
) -> PairExtraction:
    """Count co-occurring label pairs outside the excluded image set.

    raw_pair_count totals emitted pairs with multiplicity (an image with L
    labels contributes L*(L-1)/2); the returned pair map keeps only pairs seen
    in at least two images whose members do not share a superclass.
    """
    counts: Counter[tuple[str, str]] = Counter()
    raw = 0
    multi_images = 0
    for img, labels in real_labels.items():
        if img in excluded:
            continue
        if len(labels) < 2:
            continue
        for sid in labels:
            if sid not in space.classes:
                raise UnknownSynset(f"real label {sid!r} for image {img!r}")
        multi_images += 1
        ordered = sorted(labels)
        for a, b in combinations(ordered, 2):
            counts[(a, b)] += 1
            raw += 1
    pairs = {
        (a, b): c
        for (a, b), c in counts.items()
        if c >= 2 and not shares_superclass(a, b, space)
    }
    missing = len(excluded - set(real_labels))
    return PairExtraction(
        raw_pair_count=raw,
        multi_label_image_count=multi_images,
        pairs=pairs,
        missing_excluded=missing,
    )


def is_spurious(pred: str, gt_labels: set[str], extraction: PairExtraction) -> bool:
    """True iff the prediction forms a mined pair with any ground-truth label."""
    for g in gt_labels:
        if g == pred:
            continue
        key = (pred, g) if pred < g else (g, pred)
        if key in extraction.pairs:
            return True
    return False


def matching_pair(pred: str, gt_labels: set[str], extraction: PairExtraction) -> tuple[str, str] | None:
    """The mined pair that fires for this prediction, smallest partner first."""
    for g in sorted(gt_labels):
        if g == pred:
            continue
        key = (pred, g) if pred < g else (g, pred)
        if key in extraction.pairs:
            return key
    return None


def write_pairs_csv(path: str | Path, extraction: PairExtraction) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["a", "b", "count"])
        for (a, b), c in sorted(extraction.pairs.items()):
            w.writerow([a, b, c])


def read_pairs_csv(path: str | Path) -> PairExtraction:
    """Load a previously mined pairs file (raw counters are not stored in it)."""
    path = Path(path)
    pairs: dict[tuple[str, str], int] = {}
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != ["a", "b", "count"]:
                raise ParseError(f"{path}: expected header a,b,count")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise ParseError(f"{path}:{lineno}: expected a,b,count")
                a, b, c = row
                pairs[(a, b)] = int(c)
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e
    except ValueError as e:
        raise ParseError(f"{path}: bad count value: {e}") from e
    return PairExtraction(
        raw_pair_count=0,
        multi_label_image_count=0,
        pairs=pairs,
        missing_excluded=0,
    )
