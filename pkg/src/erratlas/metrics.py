"""Accuracy metrics, per-group aggregation, and expert-comparison matrices.

Portions follow the figure conventions: the two label-noise categories
(overlap / multi-label) are fractions of top-1 errors, everything from
fine-grained up is a fraction of multi-label errors.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .annotations import AnnotationStore, correct_label_set
from .cascade import NON_ERROR_CATEGORIES, ErrorCategory, ErrorRecord
from .errors import CategoryMismatch, EmptyEvaluationSet, MissingMeta, ParseError
from .label_space import LabelSpace

GROUPS = ("organism", "artifact", "other")
ALL = "all"


class ArchitectureFamily(Enum):
    CNN = "cnn"
    TRANSFORMER = "transformer"
    MLP = "mlp"
    HYBRID = "hybrid"
    OTHER = "other"


@dataclass(frozen=True)
class ModelMeta:
    name: str
    architecture_family: ArchitectureFamily
    param_count: int
    pretrain_dataset: str
    pretrain_size_images: int

    def __post_init__(self):
        if self.param_count <= 0:
            raise ValueError("param_count must be positive")
        if self.pretrain_size_images <= 0:
            raise ValueError("pretrain_size_images must be positive")


class SizeBucket(Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"
    XLARGE = "xlarge"


@dataclass(frozen=True)
class SizeThresholds:
    """Bucket edges in images; small/xlarge bounds fixed, the middle split is ours."""

    small_below: int = 5_000_000
    medium_below: int = 100_000_000
    xlarge_above: int = 500_000_000


def size_bucket(meta: ModelMeta, thresholds: SizeThresholds = SizeThresholds()) -> SizeBucket:
    n = meta.pretrain_size_images
    if n < thresholds.small_below:
        return SizeBucket.SMALL
    if n < thresholds.medium_below:
        return SizeBucket.MEDIUM
    if n > thresholds.xlarge_above:
        return SizeBucket.XLARGE
    return SizeBucket.LARGE


def load_models_manifest(path: str | Path) -> dict[str, ModelMeta]:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"{path}: {e}") from e
    metas: dict[str, ModelMeta] = {}
    for entry in data:
        meta = ModelMeta(
            name=entry["name"],
            architecture_family=ArchitectureFamily(entry["architecture_family"]),
            param_count=int(entry["param_count"]),
            pretrain_dataset=entry["pretrain_dataset"],
            pretrain_size_images=int(entry["pretrain_size_images"]),
        )
        metas[meta.name] = meta
    return metas


def _scored_images(predictions: dict[str, str], store: AnnotationStore) -> list[str]:
    imgs = [
        img
        for img in store.evaluated_images()
        if img in predictions
    ]
    if not imgs:
        raise EmptyEvaluationSet("no non-problematic annotated images with predictions")
    return imgs


def top1_accuracy(predictions: dict[str, str], store: AnnotationStore) -> float:
    """Fraction of non-problematic images whose prediction is the original label."""
    imgs = _scored_images(predictions, store)
    hits = sum(1 for img in imgs if predictions[img] == store.annotations[img].original_label)
    return hits / len(imgs)


def mla_tallies(predictions: dict[str, str], store: AnnotationStore) -> dict[str, tuple[int, int]]:
    """Per original class: (multi-label-correct count, evaluated count)."""
    imgs = _scored_images(predictions, store)
    per_class: dict[str, tuple[int, int]] = {}
    for img in imgs:
        ann = store.annotations[img]
        ok = predictions[img] in correct_label_set(img, store)
        hits, n = per_class.get(ann.original_label, (0, 0))
        per_class[ann.original_label] = (hits + (1 if ok else 0), n + 1)
    return per_class


def mla_from_tallies(tallies: dict[str, tuple[int, int]]) -> float:
    if not tallies:
        raise EmptyEvaluationSet("no classes with evaluated images")
    return sum(hits / n for hits, n in tallies.values()) / len(tallies)


def multi_label_accuracy(predictions: dict[str, str], store: AnnotationStore) -> float:
    """Mean over classes of the per-class multi-label accuracy.

    Images are keyed by their original label; a prediction counts as correct
    when it is marked correct or unclear for the image. Classes without any
    evaluated image do not enter the mean.
    """
    return mla_from_tallies(mla_tallies(predictions, store))


@dataclass(frozen=True)
class CategoryCell:
    count: int
    denominator: int

    @property
    def portion(self) -> float:
        return float(Fraction(self.count, self.denominator)) if self.denominator else 0.0

    @property
    def zero_denominator(self) -> bool:
        return self.denominator == 0


@dataclass
class ModelReport:
    model: str
    meta: ModelMeta | None
    top1_acc: float
    mla: float
    cells: dict[str, dict[ErrorCategory, CategoryCell]]  # group (or "all") -> category -> cell
    top1_errors: dict[str, int] = field(default_factory=dict)
    multi_label_errors: dict[str, int] = field(default_factory=dict)

    @property
    def mlf_portion_of_mle(self) -> float:
        return self.cells[ALL][ErrorCategory.MODEL_FAILURE].portion

    @property
    def mlf_portion_of_top1(self) -> float:
        mf = self.cells[ALL][ErrorCategory.MODEL_FAILURE].count
        denom = self.top1_errors[ALL]
        return float(Fraction(mf, denom)) if denom else 0.0


def aggregate(
    results: dict[str, tuple[list[ErrorRecord], dict[str, str]]],
    metas: dict[str, ModelMeta],
    space: LabelSpace,
    store: AnnotationStore,
    require_meta: bool = True,
) -> list[ModelReport]:
    """Build one report per model from its records and raw predictions."""
    reports = []
    for model in sorted(results):
        records, predictions = results[model]
        if model not in metas and require_meta:
            raise MissingMeta(f"no ModelMeta for {model!r}")
        reports.append(
            model_report(model, records, predictions, metas.get(model), space, store)
        )
    return reports


def category_cells(
    records: list[ErrorRecord],
    space: LabelSpace,
    store: AnnotationStore,
) -> tuple[dict[str, dict[ErrorCategory, CategoryCell]], dict[str, int], dict[str, int]]:
    """Per-group count/denominator cells plus the two error denominators."""

    def group_of(record: ErrorRecord) -> str:
        return space.classes[store.annotations[record.image].original_label].group.value

    counts: dict[str, dict[ErrorCategory, int]] = {
        g: {c: 0 for c in ErrorCategory} for g in (*GROUPS, ALL)
    }
    for r in records:
        counts[group_of(r)][r.category] += 1
        counts[ALL][r.category] += 1

    top1_errors = {g: sum(counts[g].values()) for g in counts}
    mle = {
        g: top1_errors[g] - sum(counts[g][c] for c in NON_ERROR_CATEGORIES)
        for g in counts
    }

    cells: dict[str, dict[ErrorCategory, CategoryCell]] = {}
    for g, per_cat in counts.items():
        cells[g] = {}
        for c, n in per_cat.items():
            denom = top1_errors[g] if c in NON_ERROR_CATEGORIES else mle[g]
            cells[g][c] = CategoryCell(count=n, denominator=denom)
    return cells, top1_errors, mle


def report_from_parts(
    model: str,
    records: list[ErrorRecord],
    top1_acc: float,
    mla: float,
    meta: ModelMeta | None,
    space: LabelSpace,
    store: AnnotationStore,
) -> ModelReport:
    cells, top1_errors, mle = category_cells(records, space, store)
    return ModelReport(
        model=model,
        meta=meta,
        top1_acc=top1_acc,
        mla=mla,
        cells=cells,
        top1_errors=top1_errors,
        multi_label_errors=mle,
    )


def model_report(
    model: str,
    records: list[ErrorRecord],
    predictions: dict[str, str],
    meta: ModelMeta | None,
    space: LabelSpace,
    store: AnnotationStore,
) -> ModelReport:
    return report_from_parts(
        model,
        records,
        top1_accuracy(predictions, store),
        multi_label_accuracy(predictions, store),
        meta,
        space,
        store,
    )


def write_report_csv(path: str | Path, reports: list[ModelReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["model", "group", "category", "count", "denominator", "portion"])
        for rep in reports:
            for g in (*GROUPS, ALL):
                for c in ErrorCategory:
                    cell = rep.cells[g][c]
                    w.writerow([rep.model, g, c.value, cell.count, cell.denominator, repr(cell.portion)])


def write_accuracy_csv(path: str | Path, reports: list[ModelReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["model", "top1_acc", "mla", "mlf_portion_of_mle", "mlf_portion_of_top1"])
        for rep in reports:
            w.writerow(
                [rep.model, repr(rep.top1_acc), repr(rep.mla), repr(rep.mlf_portion_of_mle), repr(rep.mlf_portion_of_top1)]
            )


@dataclass(frozen=True)
class ConfusionMatrix:
    """Expert rows x engine columns over the shared (model, image) keys."""

    expert_categories: list[str]
    auto_categories: list[str]
    counts: dict[tuple[str, str], int]

    def cell(self, expert: str, auto: str) -> int:
        return self.counts.get((expert, auto), 0)

    def row_total(self, expert: str) -> int:
        return sum(v for (e, _), v in self.counts.items() if e == expert)

    def col_total(self, auto: str) -> int:
        return sum(v for (_, a), v in self.counts.items() if a == auto)

    def total(self) -> int:
        return sum(self.counts.values())


def load_expert_csv(path: str | Path) -> dict[tuple[str, str], str]:
    path = Path(path)
    known = {c.value for c in ErrorCategory}
    out: dict[tuple[str, str], str] = {}
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != ["model", "image_id", "category"]:
                raise ParseError(f"{path}: expected header model,image_id,category")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise ParseError(f"{path}:{lineno}: expected 3 columns")
                model, img, category = row
                if category not in known:
                    raise CategoryMismatch(f"{path}:{lineno}: unknown category {category!r}")
                out[(model, img)] = category
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e
    return out


def compare_categorizations(
    auto_records: list[ErrorRecord],
    expert: dict[tuple[str, str], str],
) -> ConfusionMatrix:
    """Tally expert vs engine categories on the records both sides cover."""
    auto = {(r.model, r.image): r.category.value for r in auto_records}
    counts: dict[tuple[str, str], int] = {}
    for key, expert_cat in expert.items():
        auto_cat = auto.get(key)
        if auto_cat is None:
            continue
        counts[(expert_cat, auto_cat)] = counts.get((expert_cat, auto_cat), 0) + 1
    order = [c.value for c in ErrorCategory]
    expert_cats = [c for c in order if any(e == c for e, _ in counts)]
    auto_cats = [c for c in order if any(a == c for _, a in counts)]
    return ConfusionMatrix(expert_categories=expert_cats, auto_categories=auto_cats, counts=counts)


def write_confusion_csv(path: str | Path, matrix: ConfusionMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["expert\\auto", *matrix.auto_categories, "row_total"])
        for e in matrix.expert_categories:
            w.writerow([e, *(matrix.cell(e, a) for a in matrix.auto_categories), matrix.row_total(e)])
        w.writerow(["col_total", *(matrix.col_total(a) for a in matrix.auto_categories), matrix.total()])
