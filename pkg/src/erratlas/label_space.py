"""Label vocabulary, class groups, overlap relation, superclasses, and the hypernym DAG.

Everything here is immutable after load and safe for concurrent reads. The four
input files are described in the asset README: labels.json, overlap.json,
superclasses.json, hypernyms.csv.
"""

from __future__ import annotations

import csv
import json
import re
import statistics
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ParseError, UnknownSynset, ValidationError

SYNSET_RE = re.compile(r"^[a-z][0-9]{8}$")

# Strict-mode expectations for the full ImageNet vocabulary.
IMAGENET_CLASS_COUNT = 1000
IMAGENET_GROUP_COUNTS = {"organism": 410, "artifact": 522, "other": 68}


class Group(Enum):
    ORGANISM = "organism"
    ARTIFACT = "artifact"
    OTHER = "other"


def is_valid_synset_id(s: str) -> bool:
    return bool(SYNSET_RE.match(s))


@dataclass(frozen=True)
class ClassInfo:
    name: str
    group: Group


@dataclass(frozen=True)
class LabelSpace:
    """Validated, read-only view of the whole taxonomy."""

    classes: dict[str, ClassInfo]
    overlap_accepts: frozenset[tuple[str, str]]  # (ground_truth, accepted_prediction)
    superclasses: dict[str, frozenset[str]]
    hypernym_parents: dict[str, tuple[str, ...]]
    hypernym_children: dict[str, tuple[str, ...]]
    # derived: class id -> names of superclasses it belongs to
    memberships: dict[str, frozenset[str]] = field(default_factory=dict)

    def require_class(self, sid: str) -> None:
        if sid not in self.classes:
            raise UnknownSynset(f"not a known class: {sid!r}")

    def require_node(self, sid: str) -> None:
        if sid not in self.hypernym_parents and sid not in self.hypernym_children:
            raise UnknownSynset(f"not in the hypernym graph: {sid!r}")

    def in_vocabulary(self, sid: str) -> bool:
        """True iff sid is one of the loaded classes (the model vocabulary)."""
        return sid in self.classes


@dataclass(frozen=True)
class GroupStats:
    count: int
    mean_size: float


@dataclass(frozen=True)
class SuperclassStats:
    count: int
    min_size: int
    max_size: int
    mean_size: float
    median_size: float
    unclassified: int
    per_group: dict[str, GroupStats]


def _read_json(path: Path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"{path}: {e}") from e


def _load_classes(path: Path) -> dict[str, ClassInfo]:
    data = _read_json(path)
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a JSON array of class entries")
    classes: dict[str, ClassInfo] = {}
    for entry in data:
        try:
            sid, name, group = entry["id"], entry["name"], entry["group"]
        except (TypeError, KeyError) as e:
            raise ParseError(f"{path}: class entry missing field: {entry!r}") from e
        if not is_valid_synset_id(sid):
            raise ValidationError(f"{path}: bad synset id {sid!r}")
        if sid in classes:
            raise ValidationError(f"{path}: duplicate class id {sid!r}")
        try:
            classes[sid] = ClassInfo(name=name, group=Group(group))
        except ValueError as e:
            raise ParseError(f"{path}: unknown group {group!r} for {sid}") from e
    return classes


def _load_overlap(path: Path, classes: dict[str, ClassInfo]) -> frozenset[tuple[str, str]]:
    data = _read_json(path)
    if not isinstance(data, dict) or set(data) - {"equivalent", "contains"}:
        raise ParseError(f"{path}: expected {{equivalent, contains}}")

    def check(sid: str) -> str:
        if sid not in classes:
            raise ValidationError(f"{path}: overlap references unknown class {sid!r}")
        return sid

    accepts: set[tuple[str, str]] = set()
    for pair in data.get("equivalent", []):
        if len(pair) != 2:
            raise ParseError(f"{path}: equivalent entry is not a pair: {pair!r}")
        a, b = check(pair[0]), check(pair[1])
        accepts.add((a, b))
        accepts.add((b, a))
    for entry in data.get("contains", []):
        sup = check(entry["superset"])
        for sub in entry["subsets"]:
            # predicting the superset is accepted for any of its subsets
            accepts.add((check(sub), sup))
    for sid in classes:
        accepts.add((sid, sid))
    return frozenset(accepts)


def _load_superclasses(path: Path, classes: dict[str, ClassInfo]) -> dict[str, frozenset[str]]:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object name -> [ids]")
    supers: dict[str, frozenset[str]] = {}
    for name, members in data.items():
        for sid in members:
            if sid not in classes:
                raise ValidationError(f"{path}: superclass {name!r} references unknown class {sid!r}")
        if len(set(members)) < 2:
            raise ValidationError(f"{path}: superclass {name!r} has fewer than 2 members")
        supers[name] = frozenset(members)
    return supers


def _load_hypernyms(path: Path) -> list[tuple[str, str]]:
    edges: list[tuple[str, str]] = []
    try:
        with open(path, newline="", encoding="utf-8") as f:
            for lineno, row in enumerate(csv.reader(f), start=1):
                if not row:
                    continue
                if len(row) != 2:
                    raise ParseError(f"{path}:{lineno}: expected child_id,parent_id")
                child, parent = row
                if not (is_valid_synset_id(child) and is_valid_synset_id(parent)):
                    raise ValidationError(f"{path}:{lineno}: bad synset id in edge {row!r}")
                edges.append((child, parent))
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e
    return edges


def _check_dag(parents: dict[str, tuple[str, ...]]) -> None:
    # iterative three-color DFS; recursion would overflow on deep real graphs
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in parents}
    for start in parents:
        if color[start] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GREY
        while stack:
            node, i = stack[-1]
            if i < len(parents.get(node, ())):
                stack[-1] = (node, i + 1)
                nxt = parents[node][i]
                c = color.get(nxt, WHITE)
                if c == GREY:
                    raise ValidationError(f"hypernym graph has a cycle through {nxt!r}")
                if c == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                stack.pop()


def load_label_space(
    labels_path: str | Path,
    overlap_path: str | Path,
    superclasses_path: str | Path,
    hypernyms_path: str | Path,
    strict_imagenet: bool = False,
) -> LabelSpace:
    """Load and validate the four taxonomy files.

    With strict_imagenet=True the vocabulary must be the full 1000-class set
    with the expected 410/522/68 organism/artifact/other split.
    """
    classes = _load_classes(Path(labels_path))
    overlap = _load_overlap(Path(overlap_path), classes)
    supers = _load_superclasses(Path(superclasses_path), classes)
    edges = _load_hypernyms(Path(hypernyms_path))

    parents: dict[str, list[str]] = {}
    children: dict[str, list[str]] = {}
    seen_edges: set[tuple[str, str]] = set()
    for child, parent in edges:
        if (child, parent) in seen_edges:
            continue
        seen_edges.add((child, parent))
        parents.setdefault(child, []).append(parent)
        parents.setdefault(parent, [])
        children.setdefault(parent, []).append(child)
        children.setdefault(child, [])
    parents_t = {n: tuple(ps) for n, ps in parents.items()}
    children_t = {n: tuple(cs) for n, cs in children.items()}

    _check_dag(parents_t)
    for sid in classes:
        if sid not in parents_t or not parents_t[sid]:
            raise ValidationError(f"class {sid} has no hypernym path to a root")

    if strict_imagenet:
        if len(classes) != IMAGENET_CLASS_COUNT:
            raise ValidationError(f"expected {IMAGENET_CLASS_COUNT} classes, found {len(classes)}")
        counts = {g: 0 for g in IMAGENET_GROUP_COUNTS}
        for info in classes.values():
            counts[info.group.value] += 1
        if counts != IMAGENET_GROUP_COUNTS:
            raise ValidationError(f"group counts {counts} != expected {IMAGENET_GROUP_COUNTS}")

    memberships: dict[str, set[str]] = {sid: set() for sid in classes}
    for name, members in supers.items():
        for sid in members:
            memberships[sid].add(name)

    return LabelSpace(
        classes=classes,
        overlap_accepts=overlap,
        superclasses=supers,
        hypernym_parents=parents_t,
        hypernym_children=children_t,
        memberships={sid: frozenset(ms) for sid, ms in memberships.items()},
    )


def bundled_asset_dir() -> Path:
    return Path(__file__).parent / "assets"


def load_bundled_label_space(strict_imagenet: bool = True) -> LabelSpace:
    """Load the taxonomy files shipped inside the package."""
    root = bundled_asset_dir()
    return load_label_space(
        root / "labels.json",
        root / "overlap.json",
        root / "superclasses.json",
        root / "hypernyms.csv",
        strict_imagenet=strict_imagenet,
    )


def is_overlap_correct(gt: str, pred: str, space: LabelSpace) -> bool:
    """True iff predicting `pred` is accepted for ground truth `gt`.

    The relation is directed: tusker is accepted for an African elephant image
    but African elephant is not accepted for a tusker image.
    """
    space.require_class(gt)
    space.require_class(pred)
    return (gt, pred) in space.overlap_accepts


def shares_superclass(a: str, b: str, space: LabelSpace) -> bool:
    """True iff some superclass contains both classes (many-to-many membership)."""
    space.require_class(a)
    space.require_class(b)
    return bool(space.memberships[a] & space.memberships[b])


def shared_superclasses(a: str, b: str, space: LabelSpace) -> frozenset[str]:
    space.require_class(a)
    space.require_class(b)
    return space.memberships[a] & space.memberships[b]


def same_superclass_classes(sid: str, space: LabelSpace) -> set[str]:
    """All classes sharing at least one superclass with sid (including sid itself)."""
    space.require_class(sid)
    out: set[str] = set()
    for name in space.memberships[sid]:
        out |= space.superclasses[name]
    return out


def superclass_stats(space: LabelSpace) -> SuperclassStats:
    """Catalogue statistics: overall sizes plus per-group superclass counts.

    A superclass is counted under the first of organism/artifact/other that any
    of its members belongs to.
    """
    sizes = [len(m) for m in space.superclasses.values()]
    classified = set().union(*space.superclasses.values()) if space.superclasses else set()
    unclassified = len([sid for sid in space.classes if sid not in classified])

    per_group_sizes: dict[str, list[int]] = {g.value: [] for g in Group}
    for members in space.superclasses.values():
        groups = {space.classes[sid].group for sid in members}
        for g in (Group.ORGANISM, Group.ARTIFACT, Group.OTHER):
            if g in groups:
                per_group_sizes[g.value].append(len(members))
                break
    per_group = {
        g: GroupStats(count=len(s), mean_size=(sum(s) / len(s)) if s else 0.0)
        for g, s in per_group_sizes.items()
    }
    if not sizes:
        return SuperclassStats(0, 0, 0, 0.0, 0.0, unclassified, per_group)
    return SuperclassStats(
        count=len(sizes),
        min_size=min(sizes),
        max_size=max(sizes),
        mean_size=sum(sizes) / len(sizes),
        median_size=float(statistics.median(sizes)),
        unclassified=unclassified,
        per_group=per_group,
    )


def direct_siblings(sid: str, space: LabelSpace) -> set[str]:
    """Union of the children of every parent of sid, minus sid itself."""
    space.require_node(sid)
    out: set[str] = set()
    for parent in space.hypernym_parents.get(sid, ()):
        out.update(space.hypernym_children.get(parent, ()))
    out.discard(sid)
    return out


def ancestors_of(sid: str, space: LabelSpace) -> set[str]:
    """All strict ancestors of sid in the hypernym DAG."""
    space.require_node(sid)
    out: set[str] = set()
    frontier = list(space.hypernym_parents.get(sid, ()))
    while frontier:
        node = frontier.pop()
        if node in out:
            continue
        out.add(node)
        frontier.extend(space.hypernym_parents.get(node, ()))
    return out


def ancestors_below_common(pred: str, anchor: str, space: LabelSpace) -> set[str]:
    """Strict ancestors of pred that are not ancestors (or equal) of anchor.

    On a tree this is exactly the chain from pred up to, but excluding, the
    first common ancestor with anchor; on a DAG it excludes everything the
    anchor can reach upward.
    """
    space.require_node(pred)
    space.require_node(anchor)
    blocked = ancestors_of(anchor, space) | {anchor}
    return {a for a in ancestors_of(pred, space) if a not in blocked}
