"""Severity-ordered classification of single mispredictions.

Stages run strictly in order and the first that fires wins, so every record
carries the least severe explanation that applies:

  overlap_correct < multi_label_correct < fine_grained < fine_grained_oov
  < non_prototypical < spurious_correlation < model_failure

ImageNet-A runs carry no multi-label annotations: the multi-label stage is
dropped and the ground-truth anchor set shrinks to the original label.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from . import cooccurrence, label_space as ls
from .annotations import AnnotationStore, correct_label_set
from .cooccurrence import PairExtraction
from .embeddings import EmbeddingMatrix, knn
from .embeddings import score_proposals as _score_proposals
from .errors import MissingEmbedding, UnknownSynset, ValidationError
from .label_space import LabelSpace


class ErrorCategory(Enum):
    OVERLAP_CORRECT = "overlap_correct"
    MULTI_LABEL_CORRECT = "multi_label_correct"
    FINE_GRAINED = "fine_grained"
    FINE_GRAINED_OOV = "fine_grained_oov"
    NON_PROTOTYPICAL = "non_prototypical"
    SPURIOUS_CORRELATION = "spurious_correlation"
    MODEL_FAILURE = "model_failure"

    @property
    def severity(self) -> int:
        return _SEVERITY[self]


_SEVERITY = {c: i for i, c in enumerate(ErrorCategory)}

# categories that are re-labelings of correct predictions, not real errors
NON_ERROR_CATEGORIES = (ErrorCategory.OVERLAP_CORRECT, ErrorCategory.MULTI_LABEL_CORRECT)


class Mode(Enum):
    IMAGENET = "imagenet"
    IMAGENET_A = "imagenet-a"


@dataclass(frozen=True)
class CascadeConfig:
    k_neighbors: int = 10
    mode: Mode = Mode.IMAGENET
    oov_anchor: str = "original"  # extension point; only the original label is supported

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.oov_anchor != "original":
            raise ValueError(f"unsupported oov_anchor {self.oov_anchor!r}")


@dataclass(frozen=True)
class CascadeContext:
    space: LabelSpace
    store: AnnotationStore
    pairs: PairExtraction
    config: CascadeConfig = CascadeConfig()
    ref_index: EmbeddingMatrix | None = None
    ref_labels: dict[str, str] = field(default_factory=dict)
    eval_index: EmbeddingMatrix | None = None
    text_index: EmbeddingMatrix | None = None


@dataclass(frozen=True)
class ErrorRecord:
    model: str
    image: str
    predicted: str
    category: ErrorCategory
    evidence: dict

    def evidence_json(self) -> str:
        return json.dumps(self.evidence, sort_keys=True, separators=(",", ":"))


def _anchor_set(img: str, ctx: CascadeContext) -> set[str]:
    if ctx.config.mode is Mode.IMAGENET:
        return correct_label_set(img, ctx.store)
    return {ctx.store.require_image(img).original_label}


def _ordered(anchors: set[str], original: str) -> list[str]:
    rest = sorted(anchors - {original})
    return ([original] if original in anchors else []) + rest


def _check_overlap(pred: str, original: str, anchors: set[str], ctx: CascadeContext) -> str | None:
    # the reflexive (pred, pred) acceptance belongs to the multi-label stage,
    # not here, so the prediction itself never anchors the overlap test
    candidates = [original] + sorted(anchors - {original})
    for g in candidates:
        if g != pred and ls.is_overlap_correct(g, pred, ctx.space):
            return g
    return None


def _check_fine_grained(pred: str, anchors: set[str], original: str, ctx: CascadeContext) -> tuple[str, str] | None:
    for g in _ordered(anchors, original):
        shared = ls.shared_superclasses(pred, g, ctx.space)
        if shared:
            return min(shared), g
    return None


def oov_proposals(pred: str, original: str, space: LabelSpace) -> set[str]:
    """Label proposals for the out-of-vocabulary check.

    Union of: classes sharing a superclass with the prediction (including the
    prediction itself), the prediction's direct hypernym siblings, and its
    ancestors below the first ancestor shared with the original label.
    """
    proposals = ls.same_superclass_classes(pred, space)
    proposals |= ls.direct_siblings(pred, space)
    proposals |= ls.ancestors_below_common(pred, original, space)
    return proposals


def _check_fine_grained_oov(model: str, img: str, pred: str, original: str, ctx: CascadeContext) -> dict | None:
    if not ctx.space.memberships[pred]:
        # the neighbor gate needs a shared superclass with the prediction,
        # which a superclass-less prediction can never satisfy
        return None
    if ctx.ref_index is None or ctx.eval_index is None or ctx.text_index is None:
        raise MissingEmbedding(f"{model}/{img}: embedding assets not loaded for the OOV stage")
    if img not in ctx.eval_index:
        raise MissingEmbedding(f"{model}/{img}: no evaluation embedding")
    neighbors = knn(ctx.eval_index.vector(img), ctx.ref_index, ctx.config.k_neighbors)

    matched_superclass: str | None = None
    for nb in neighbors:
        label = ctx.ref_labels.get(nb.id)
        if label is None:
            raise ValidationError(f"reference image {nb.id!r} has no training label")
        shared = ls.shared_superclasses(label, pred, ctx.space)
        if shared:
            matched_superclass = min(shared)
            break
    if matched_superclass is None:
        return None

    proposals = oov_proposals(pred, original, ctx.space)
    best, _scores = _score_proposals(ctx.eval_index.vector(img), proposals, ctx.text_index)
    if ctx.space.in_vocabulary(best):
        return None
    return {
        "neighbor_ids": [nb.id for nb in neighbors],
        "matched_superclass": matched_superclass,
        "best_proposal": best,
        "best_is_oov": True,
    }


def classify(model: str, img: str, pred: str, ctx: CascadeContext) -> ErrorRecord | None:
    """Run the cascade for one prediction; None means top-1 correct."""
    ann = ctx.store.require_image(img)
    if ann.problematic:
        raise ValidationError(f"image {img!r} is problematic and must not be classified")
    if pred not in ctx.space.classes:
        raise UnknownSynset(f"prediction {pred!r} is not a known class")
    original = ann.original_label

    if pred == original:
        return None

    def record(category: ErrorCategory, evidence: dict) -> ErrorRecord:
        return ErrorRecord(model=model, image=img, predicted=pred, category=category, evidence=evidence)

    anchors = _anchor_set(img, ctx)

    matched_gt = _check_overlap(pred, original, anchors, ctx)
    if matched_gt is not None:
        return record(ErrorCategory.OVERLAP_CORRECT, {"matched_gt": matched_gt})

    if ctx.config.mode is Mode.IMAGENET and pred in anchors:
        return record(ErrorCategory.MULTI_LABEL_CORRECT, {"matched_label": pred})

    fg = _check_fine_grained(pred, anchors, original, ctx)
    if fg is not None:
        shared, g = fg
        return record(ErrorCategory.FINE_GRAINED, {"shared_superclass": shared, "matched_label": g})

    oov = _check_fine_grained_oov(model, img, pred, original, ctx)
    if oov is not None:
        return record(ErrorCategory.FINE_GRAINED_OOV, oov)

    if img in ctx.store.non_prototypical:
        return record(ErrorCategory.NON_PROTOTYPICAL, {})

    pair = cooccurrence.matching_pair(pred, anchors, ctx.pairs)
    if pair is not None:
        return record(ErrorCategory.SPURIOUS_CORRELATION, {"pair": list(pair)})

    return record(ErrorCategory.MODEL_FAILURE, {})


@dataclass
class ClassifyResult:
    model: str
    records: list[ErrorRecord]
    correct: int
    evaluated: int
    missing_predictions: list[str]
    extra_predictions: list[str]
    skipped: list[tuple[str, str]]  # (image, reason) soft-fail entries

    def counts(self) -> dict[ErrorCategory, int]:
        out = {c: 0 for c in ErrorCategory}
        for r in self.records:
            out[r.category] += 1
        return out

    def counts_by_group(self, space: LabelSpace, store: AnnotationStore) -> dict[str, dict[ErrorCategory, int]]:
        out: dict[str, dict[ErrorCategory, int]] = {}
        for r in self.records:
            group = space.classes[store.annotations[r.image].original_label].group.value
            out.setdefault(group, {c: 0 for c in ErrorCategory})[r.category] += 1
        return out


def classify_model(model: str, predictions: dict[str, str], ctx: CascadeContext) -> ClassifyResult:
    """Cascade every prediction of one model; output order is by image id.

    Problematic images are never evaluated. Images whose OOV stage lacks an
    embedding are skipped with a reason instead of failing the batch.
    """
    annotated = set(ctx.store.annotations)
    evaluable = {i for i in annotated if not ctx.store.annotations[i].problematic}
    missing = sorted(evaluable - set(predictions))
    extra = sorted(set(predictions) - annotated)

    records: list[ErrorRecord] = []
    skipped: list[tuple[str, str]] = []
    correct = 0
    evaluated = 0
    for img in sorted(predictions):
        if img not in evaluable:
            continue
        evaluated += 1
        try:
            rec = classify(model, img, predictions[img], ctx)
        except MissingEmbedding as e:
            evaluated -= 1
            skipped.append((img, str(e)))
            continue
        if rec is None:
            correct += 1
        else:
            records.append(rec)
    return ClassifyResult(
        model=model,
        records=records,
        correct=correct,
        evaluated=evaluated,
        missing_predictions=missing,
        extra_predictions=extra,
        skipped=skipped,
    )


RECORDS_HEADER = ["model", "image_id", "predicted", "category", "evidence_json"]


def write_records_csv(path: str | Path, records: list[ErrorRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(RECORDS_HEADER)
        for r in records:
            w.writerow([r.model, r.image, r.predicted, r.category.value, r.evidence_json()])


def read_records_csv(path: str | Path) -> list[ErrorRecord]:
    from .errors import ParseError

    path = Path(path)
    records: list[ErrorRecord] = []
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != RECORDS_HEADER:
                raise ParseError(f"{path}: unexpected header {header!r}")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 5:
                    raise ParseError(f"{path}:{lineno}: expected 5 columns")
                model, img, pred, category, evidence = row
                records.append(
                    ErrorRecord(
                        model=model,
                        image=img,
                        predicted=pred,
                        category=ErrorCategory(category),
                        evidence=json.loads(evidence),
                    )
                )
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e
    except ValueError as e:
        raise ParseError(f"{path}: {e}") from e
    return records


def severity_audit(record: ErrorRecord, ctx: CascadeContext) -> list[str]:
    """Re-evaluate every stage less severe than the record's; list violations.

    Empty result means no earlier stage's predicate holds, i.e. the record is
    severity-minimal.
    """
    img, pred = record.image, record.predicted
    ann = ctx.store.require_image(img)
    original = ann.original_label
    anchors = _anchor_set(img, ctx)
    sev = record.category.severity
    problems: list[str] = []

    if pred == original:
        problems.append("prediction equals the original label")
    if sev > _SEVERITY[ErrorCategory.OVERLAP_CORRECT]:
        if _check_overlap(pred, original, anchors, ctx) is not None:
            problems.append("overlap stage would fire")
    if sev > _SEVERITY[ErrorCategory.MULTI_LABEL_CORRECT]:
        if ctx.config.mode is Mode.IMAGENET and pred in anchors:
            problems.append("multi-label stage would fire")
    if sev > _SEVERITY[ErrorCategory.FINE_GRAINED]:
        if _check_fine_grained(pred, anchors, original, ctx) is not None:
            problems.append("fine-grained stage would fire")
    if sev > _SEVERITY[ErrorCategory.FINE_GRAINED_OOV]:
        if _check_fine_grained_oov(record.model, img, pred, original, ctx) is not None:
            problems.append("fine-grained OOV stage would fire")
    if sev > _SEVERITY[ErrorCategory.NON_PROTOTYPICAL]:
        if img in ctx.store.non_prototypical:
            problems.append("non-prototypical stage would fire")
    if sev > _SEVERITY[ErrorCategory.SPURIOUS_CORRELATION]:
        if cooccurrence.is_spurious(pred, anchors, ctx.pairs):
            problems.append("spurious-correlation stage would fire")
    return problems
