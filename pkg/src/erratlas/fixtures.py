"""Deterministic synthetic worlds with one known outcome planted per image.

Every planted error instance gets its own fresh ground-truth and prediction
classes, so no stage can fire by accident and the cascade must recover the
planted category exactly. Regenerating with the same seed is byte-identical,
which the CLI determinism checks rely on.

Geometry: class embedding centers are one-hot axes (dim = number of classes),
reference images sit in a tight noise ball around their center, and the
planted out-of-vocabulary synset's text embedding points exactly at the
mispredicted image's embedding so it always wins the proposal scoring.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cascade import ErrorCategory
from .embeddings import write_embeddings

CATEGORIES = [c.value for c in ErrorCategory]


@dataclass(frozen=True)
class WorldParams:
    n_per_category: int = 3
    n_correct: int = 4
    n_problematic: int = 2
    refs_per_class: int = 2
    noise: float = 0.02
    n_models: int = 2
    min_refs: int = 12  # keep the reference index comfortably above k=10


@dataclass
class PlantedWorld:
    root: Path
    manifest_path: Path
    truth: dict[str, str]  # image id -> planted outcome (category value, correct, problematic)
    model_names: list[str]
    params: WorldParams
    class_count: int = 0
    oov_synsets: list[str] = field(default_factory=list)


class _Minter:
    def __init__(self):
        self.counters: dict[str, int] = {}

    def synset(self, prefix: str) -> str:
        i = self.counters.get(prefix, 0)
        self.counters[prefix] = i + 1
        return f"{prefix}{i:08d}"

    def image(self) -> str:
        i = self.counters.get("img", 0)
        self.counters["img"] = i + 1
        return f"VAL_{i:08d}"


def generate_world(seed: int, out_dir: str | Path, params: WorldParams = WorldParams()) -> PlantedWorld:
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    mint = _Minter()
    n = params.n_per_category

    groups = ("organism", "artifact", "other")
    classes: list[tuple[str, str, str]] = []  # (id, name, group)
    superclasses: dict[str, list[str]] = {}
    overlap = {"equivalent": [], "contains": []}
    hyper_edges: list[tuple[str, str]] = []
    synset_names: dict[str, str] = {}
    originals: list[tuple[str, str]] = []
    verdict_rows: list[tuple[str, str, str]] = []
    problematic: list[str] = []
    non_proto: list[str] = []
    real_rows: list[tuple[str, str]] = []
    predictions: dict[str, str] = {}
    truth: dict[str, str] = {}
    oov_synsets: list[str] = []

    ROOT = mint.synset("y")
    MISC = mint.synset("y")
    synset_names[ROOT] = "root node"
    synset_names[MISC] = "miscellaneous"
    hyper_edges.append((MISC, ROOT))

    def new_class(group_hint: int, parent: str = MISC) -> str:
        sid = mint.synset("x")
        classes.append((sid, f"syn {sid[1:]}", groups[group_hint % 3]))
        hyper_edges.append((sid, parent))
        return sid

    def new_image(gt: str, pred: str, outcome: str) -> str:
        img = mint.image()
        originals.append((img, gt))
        predictions[img] = pred
        truth[img] = outcome
        return img

    # ---- correct predictions -------------------------------------------------
    if params.n_correct < 1:
        raise ValueError("n_correct must be >= 1")
    correct_images: list[str] = []
    for i in range(params.n_correct):
        gt = new_class(i)
        correct_images.append(new_image(gt, gt, "correct"))

    # ---- problematic images (wrong prediction, must be excluded) -------------
    for i in range(params.n_problematic):
        gt, pred = new_class(i), new_class(i + 1)
        img = new_image(gt, pred, "problematic")
        problematic.append(img)

    # ---- overlap_correct ------------------------------------------------------
    for i in range(n):
        gt, pred = new_class(i), new_class(i)
        if i % 3 == 0:
            overlap["contains"].append({"superset": pred, "subsets": [gt]})
            new_image(gt, pred, "overlap_correct")
        elif i % 3 == 1:
            overlap["equivalent"].append([gt, pred])
            new_image(gt, pred, "overlap_correct")
        else:
            # acceptance via a correct multi-label rather than the original
            ml = new_class(i)
            overlap["contains"].append({"superset": pred, "subsets": [ml]})
            img = new_image(gt, pred, "overlap_correct")
            verdict_rows.append((img, ml, "correct"))

    # ---- multi_label_correct --------------------------------------------------
    for i in range(n):
        gt, pred = new_class(i), new_class(i)
        img = new_image(gt, pred, "multi_label_correct")
        verdict_rows.append((img, pred, "unclear" if i % 2 else "correct"))

    # ---- fine_grained -----------------------------------------------------------
    for i in range(n):
        gt, pred = new_class(i), new_class(i)
        parent = mint.synset("y")
        synset_names[parent] = f"node {parent[1:]}"
        hyper_edges.append((parent, ROOT))
        if i % 3 == 2:
            # prediction confusable with an extra multi-label, not the original
            ml = new_class(i, parent=parent)
            superclasses[f"sc {parent[1:]}"] = [ml, pred]
            img = new_image(gt, pred, "fine_grained")
            verdict_rows.append((img, ml, "correct"))
        else:
            superclasses[f"sc {parent[1:]}"] = [gt, pred]
            new_image(gt, pred, "fine_grained")
        # reattach members under the shared pseudo-parent for a denser graph
        hyper_edges.append((gt, parent))
        hyper_edges.append((pred, parent))

    # ---- fine_grained_oov -------------------------------------------------------
    oov_cases: list[tuple[str, str, str]] = []  # (img, pred, oov synset)
    for i in range(n):
        gt = new_class(i)
        parent = mint.synset("y")
        synset_names[parent] = f"node {parent[1:]}"
        hyper_edges.append((parent, ROOT))
        pred = new_class(i, parent=parent)
        buddy = new_class(i, parent=parent)
        superclasses[f"sc {parent[1:]}"] = [pred, buddy]
        oov = mint.synset("z")
        synset_names[oov] = f"oov {oov[1:]}"
        hyper_edges.append((oov, parent))
        oov_synsets.append(oov)
        img = new_image(gt, pred, "fine_grained_oov")
        oov_cases.append((img, pred, oov))

    # ---- non_prototypical -------------------------------------------------------
    for i in range(n):
        gt, pred = new_class(i), new_class(i)
        img = new_image(gt, pred, "non_prototypical")
        non_proto.append(img)

    # ---- spurious_correlation -----------------------------------------------------
    for i in range(n):
        gt, pred = new_class(i), new_class(i)
        img = new_image(gt, pred, "spurious_correlation")
        # two disjoint mining images make the (gt, pred) pair survive filtering
        for _ in range(2):
            mining_img = mint.image()
            real_rows.append((mining_img, gt))
            real_rows.append((mining_img, pred))

    # ---- model_failure ----------------------------------------------------------
    for i in range(n):
        gt, pred = new_class(i), new_class(i)
        img = new_image(gt, pred, "model_failure")
        # trap: the pair co-occurs on two evaluated images, so it would survive
        # the count filter if the evaluation-set exclusion were broken and turn
        # this planting into a spurious correlation
        real_rows.append((img, gt))
        real_rows.append((img, pred))
        real_rows.append((correct_images[0], gt))
        real_rows.append((correct_images[0], pred))

    # ---- embeddings ---------------------------------------------------------------
    class_ids = [sid for sid, _, _ in classes]
    dim = len(class_ids)
    axis = {sid: i for i, sid in enumerate(class_ids)}

    def center(sid: str) -> np.ndarray:
        v = np.zeros(dim, dtype=np.float64)
        v[axis[sid]] = 1.0
        return v

    refs_per_class = params.refs_per_class
    while refs_per_class * len(class_ids) < params.min_refs:
        refs_per_class += 1
    ref_ids: list[str] = []
    ref_vecs: list[np.ndarray] = []
    ref_label_rows: list[tuple[str, str]] = []
    for sid in class_ids:
        for j in range(refs_per_class):
            rid = f"TRAIN_{sid}_{j:02d}"
            vec = center(sid) + params.noise * rng.standard_normal(dim)
            ref_ids.append(rid)
            ref_vecs.append(vec)
            ref_label_rows.append((rid, sid))

    eval_ids: list[str] = []
    eval_vecs: list[np.ndarray] = []
    oov_by_image = {img: (pred, oov) for img, pred, oov in oov_cases}
    for img, gt in originals:
        if img in oov_by_image:
            vec = center(oov_by_image[img][0])  # sits exactly on the predicted class
        else:
            vec = center(gt) + params.noise * rng.standard_normal(dim)
        eval_ids.append(img)
        eval_vecs.append(vec)

    # text embeddings for every synset in the hypernym graph
    text_axis = rng.standard_normal(dim)
    text_axis /= np.linalg.norm(text_axis)
    all_nodes = sorted({s for e in hyper_edges for s in e})
    oov_text = {oov: pred for _, pred, oov in oov_cases}
    text_ids: list[str] = []
    text_vecs: list[np.ndarray] = []
    for node in all_nodes:
        if node in oov_text:
            vec = center(oov_text[node])  # exact match with its planted image
        elif node in axis:
            vec = 0.6 * center(node) + 0.8 * text_axis
        else:
            vec = text_axis + params.noise * rng.standard_normal(dim)
        text_ids.append(node)
        text_vecs.append(vec)

    # ---- write everything -----------------------------------------------------------
    def dump_json(name: str, obj) -> None:
        with open(root / name, "w", encoding="utf-8", newline="\n") as f:
            json.dump(obj, f, indent=1, sort_keys=True)
            f.write("\n")

    def dump_csv(name: str, rows) -> None:
        with open(root / name, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            for row in rows:
                w.writerow(row)

    def dump_lines(name: str, lines) -> None:
        with open(root / name, "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(line + "\n")

    dump_json("labels.json", [{"id": s, "name": nm, "group": g} for s, nm, g in classes])
    dump_json("overlap.json", overlap)
    dump_json("superclasses.json", superclasses)
    dump_csv("hypernyms.csv", sorted(set(hyper_edges)))
    dump_csv("synsets.csv", sorted(synset_names.items()))
    dump_csv("originals.csv", originals)
    dump_csv("multilabel.csv", verdict_rows)
    dump_lines("problematic.txt", problematic)
    dump_lines("nonprototypical.txt", non_proto)
    dump_csv("real_labels.csv", real_rows)

    write_embeddings(root / "ref.emb", root / "ref.ids", ref_ids, np.array(ref_vecs, dtype=np.float32))
    dump_csv("ref_labels.csv", ref_label_rows)
    write_embeddings(root / "eval.emb", root / "eval.ids", eval_ids, np.array(eval_vecs, dtype=np.float32))
    write_embeddings(root / "text.emb", root / "text.ids", text_ids, np.array(text_vecs, dtype=np.float32))

    preds_dir = root / "predictions"
    preds_dir.mkdir(exist_ok=True)
    model_names = [f"model-{m:02d}" for m in range(params.n_models)]
    for name in model_names:
        dump_csv(f"predictions/{name}.csv", sorted(predictions.items()))

    dump_json(
        "models.json",
        [
            {
                "name": name,
                "architecture_family": ["cnn", "transformer", "mlp", "hybrid", "other"][m % 5],
                "param_count": 1_000_000 * (m + 1),
                "pretrain_dataset": f"corpus-{m}",
                "pretrain_size_images": [1_281_167, 14_000_000, 300_000_000, 2_000_000_000][m % 4],
            }
            for m, name in enumerate(model_names)
        ],
    )

    dump_csv("truth.csv", sorted(truth.items()))

    files = {
        "labels": "labels.json",
        "overlap": "overlap.json",
        "superclasses": "superclasses.json",
        "hypernyms": "hypernyms.csv",
        "synset_names": "synsets.csv",
        "originals": "originals.csv",
        "multilabel": "multilabel.csv",
        "problematic": "problematic.txt",
        "non_prototypical": "nonprototypical.txt",
        "real_labels": "real_labels.csv",
        "ref_embeddings": "ref.emb",
        "ref_ids": "ref.ids",
        "ref_labels": "ref_labels.csv",
        "eval_embeddings": "eval.emb",
        "eval_ids": "eval.ids",
        "text_embeddings": "text.emb",
        "text_ids": "text.ids",
        "models": "models.json",
    }
    checksums = {}
    for rel in sorted(set(files.values())):
        h = hashlib.sha256()
        h.update((root / rel).read_bytes())
        checksums[rel] = h.hexdigest()
    manifest = {
        "dataset_mode": "imagenet",
        "files": files,
        "embedding_provenance": f"planted-world generator, seed={seed}",
        "checksums": checksums,
    }
    dump_json("manifest.json", manifest)

    return PlantedWorld(
        root=root,
        manifest_path=root / "manifest.json",
        truth=truth,
        model_names=model_names,
        params=params,
        class_count=len(class_ids),
        oov_synsets=oov_synsets,
    )


def load_truth(path: str | Path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8") as f:
        return {img: outcome for img, outcome in csv.reader(f) if img}
