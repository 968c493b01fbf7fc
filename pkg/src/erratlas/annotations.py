"""Per-image ground truth: multi-label verdicts, problematic flags, and friends.

File formats (all UTF-8):
  multilabel CSV   image_id,label_id,verdict   verdict in {correct,wrong,unclear}
  problematic      one image id per line
  non-prototypical one image id per line
  real-labels CSV  image_id,label_id           one row per label
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    DuplicateImage,
    DuplicateVerdict,
    ParseError,
    UnknownImage,
    UnknownSynset,
    ValidationError,
)
from .label_space import LabelSpace


class Verdict(Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    UNCLEAR = "unclear"


@dataclass(frozen=True)
class ImageAnnotation:
    image: str
    original_label: str
    verdicts: dict[str, Verdict]
    problematic: bool = False


@dataclass(frozen=True)
class AnnotationStore:
    annotations: dict[str, ImageAnnotation]
    non_prototypical: frozenset[str] = frozenset()
    real_labels: dict[str, frozenset[str]] = field(default_factory=dict)

    def require_image(self, img: str) -> ImageAnnotation:
        ann = self.annotations.get(img)
        if ann is None:
            raise UnknownImage(f"image not annotated: {img!r}")
        return ann

    def evaluated_images(self) -> list[str]:
        """Annotated, non-problematic images, in sorted order."""
        return sorted(i for i, a in self.annotations.items() if not a.problematic)


def _read_id_lines(path: Path) -> list[str]:
    try:
        with open(path, encoding="utf-8") as f:
            return [line.strip() for line in f if line.strip()]
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e


def load_multilabel_csv(path: str | Path, space: LabelSpace) -> dict[str, dict[str, Verdict]]:
    """Read verdict rows into image -> {label -> verdict}."""
    path = Path(path)
    verdicts: dict[str, dict[str, Verdict]] = {}
    try:
        with open(path, newline="", encoding="utf-8") as f:
            for lineno, row in enumerate(csv.reader(f), start=1):
                if not row:
                    continue
                if len(row) != 3:
                    raise ParseError(f"{path}:{lineno}: expected image_id,label_id,verdict")
                img, label, verdict = row
                if label not in space.classes:
                    raise UnknownSynset(f"{path}:{lineno}: unknown label {label!r}")
                try:
                    v = Verdict(verdict)
                except ValueError as e:
                    raise ParseError(f"{path}:{lineno}: bad verdict {verdict!r}") from e
                per_image = verdicts.setdefault(img, {})
                if label in per_image:
                    raise DuplicateVerdict(f"{path}:{lineno}: second verdict for ({img}, {label})")
                per_image[label] = v
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e
    return verdicts


def load_real_labels_csv(path: str | Path, space: LabelSpace) -> dict[str, frozenset[str]]:
    path = Path(path)
    labels: dict[str, set[str]] = {}
    try:
        with open(path, newline="", encoding="utf-8") as f:
            for lineno, row in enumerate(csv.reader(f), start=1):
                if not row:
                    continue
                if len(row) != 2:
                    raise ParseError(f"{path}:{lineno}: expected image_id,label_id")
                img, label = row
                if label not in space.classes:
                    raise UnknownSynset(f"{path}:{lineno}: unknown label {label!r}")
                labels.setdefault(img, set()).add(label)
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e
    return {img: frozenset(ls) for img, ls in labels.items()}


def load_annotations(
    space: LabelSpace,
    originals_path: str | Path,
    multilabel_path: str | Path | None = None,
    problematic_path: str | Path | None = None,
    non_prototypical_path: str | Path | None = None,
    real_labels_path: str | Path | None = None,
) -> AnnotationStore:
    """Assemble the store from its files.

    originals CSV maps image_id,original_label and defines the evaluation set;
    every other file is optional (ImageNet-A runs carry no multilabel file).
    """
    originals_path = Path(originals_path)
    originals: dict[str, str] = {}
    try:
        with open(originals_path, newline="", encoding="utf-8") as f:
            for lineno, row in enumerate(csv.reader(f), start=1):
                if not row:
                    continue
                if len(row) != 2:
                    raise ParseError(f"{originals_path}:{lineno}: expected image_id,label_id")
                img, label = row
                if label not in space.classes:
                    raise UnknownSynset(f"{originals_path}:{lineno}: unknown label {label!r}")
                if img in originals:
                    raise DuplicateImage(f"{originals_path}:{lineno}: image {img!r} listed twice")
                originals[img] = label
    except OSError as e:
        raise ParseError(f"{originals_path}: {e}") from e

    verdicts = load_multilabel_csv(multilabel_path, space) if multilabel_path else {}
    for img in verdicts:
        if img not in originals:
            raise ValidationError(f"verdicts reference unannotated image {img!r}")

    problematic = set(_read_id_lines(Path(problematic_path))) if problematic_path else set()
    for img in problematic:
        if img not in originals:
            raise ValidationError(f"problematic list references unannotated image {img!r}")

    non_proto = set(_read_id_lines(Path(non_prototypical_path))) if non_prototypical_path else set()
    for img in non_proto:
        if img not in originals:
            raise ValidationError(f"non-prototypical list references unannotated image {img!r}")

    real = load_real_labels_csv(real_labels_path, space) if real_labels_path else {}

    annotations = {
        img: ImageAnnotation(
            image=img,
            original_label=label,
            verdicts=verdicts.get(img, {}),
            problematic=img in problematic,
        )
        for img, label in originals.items()
    }
    return AnnotationStore(
        annotations=annotations,
        non_prototypical=frozenset(non_proto),
        real_labels=real,
    )


def correct_label_set(img: str, store: AnnotationStore) -> set[str]:
    """Labels accepted as correct for this image.

    A label counts if its verdict is correct or unclear. The original label
    additionally counts when it has no explicit verdict row (annotation files
    only verdict reviewed labels; an explicit wrong row overrides).
    """
    ann = store.require_image(img)
    out = {label for label, v in ann.verdicts.items() if v in (Verdict.CORRECT, Verdict.UNCLEAR)}
    if ann.original_label not in ann.verdicts:
        out.add(ann.original_label)
    return out
