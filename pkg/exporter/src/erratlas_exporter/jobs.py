"""Export jobs: run classifiers over images and emit the engine's asset files.

Layout conventions:
  eval images   flat directory, file stem = evaluation image id
  ref images    one subdirectory per label id (training-set layout), so the
                companion ref_labels.csv falls out of the directory names
  taxonomy in   labels.json (+ hypernyms.csv + optional synsets.csv) in the
                engine's documented formats; text embeddings cover every
                synset appearing in the hypernym file
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import make_classifier, make_embedder
from .formats import sha256_of, write_csv, write_emb1, write_json

IMAGE_EXTS = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}


@dataclass
class ExportJob:
    model_specs: list[str]            # e.g. ["stub:alpha", "torchvision:mobilenet_v3_small"]
    eval_image_root: Path
    ref_image_root: Path
    labels_path: Path                 # engine labels.json (defines the vocabulary)
    hypernyms_path: Path              # engine hypernyms.csv (text-embedding coverage)
    out_dir: Path
    synset_names_path: Path | None = None
    eval_labels_path: Path | None = None  # optional image_id,label_id ground truth
    embedding_model: str = "stub:dim=32"
    prompt_template: str = "a photo of a {}."
    seed: int = 0
    extra_taxonomy: dict[str, Path] = field(default_factory=dict)  # overlap/superclasses to bundle

    def __post_init__(self):
        for name in ("eval_image_root", "ref_image_root", "labels_path", "hypernyms_path", "out_dir"):
            setattr(self, name, Path(getattr(self, name)))


def _images_in(root: Path) -> list[Path]:
    return sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_EXTS)


def _load_vocabulary(job: ExportJob) -> list[dict]:
    with open(job.labels_path, encoding="utf-8") as f:
        return json.load(f)


def _synset_names(job: ExportJob) -> dict[str, str]:
    names = {entry["id"]: entry["name"] for entry in _load_vocabulary(job)}
    if job.synset_names_path:
        with open(job.synset_names_path, newline="", encoding="utf-8") as f:
            for row in csv.reader(f):
                if row:
                    names.setdefault(row[0], row[1])
    return names


def _hypernym_synsets(job: ExportJob) -> list[str]:
    seen: set[str] = set()
    with open(job.hypernyms_path, newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            seen.update(row)
    return sorted(seen)


def export_predictions(job: ExportJob) -> dict[str, Path]:
    """One CSV per model plus a models.json metadata manifest."""
    job.out_dir.mkdir(parents=True, exist_ok=True)
    preds_dir = job.out_dir / "predictions"
    preds_dir.mkdir(exist_ok=True)
    classes = sorted(entry["id"] for entry in _load_vocabulary(job))
    images = _images_in(job.eval_image_root)

    outputs: dict[str, Path] = {}
    metas = []
    for spec in job.model_specs:
        clf = make_classifier(spec, classes, seed=job.seed)
        rows = [(img.stem, clf.predict(img)) for img in images]
        path = preds_dir / f"{clf.name}.csv"
        write_csv(path, rows)
        outputs[clf.name] = path
        info = clf.info()
        metas.append(
            {
                "name": info.name,
                "architecture_family": info.architecture_family,
                "param_count": info.param_count,
                "pretrain_dataset": info.pretrain_dataset,
                "pretrain_size_images": info.pretrain_size_images,
            }
        )
    write_json(job.out_dir / "models.json", metas)
    return outputs


def export_embeddings(job: ExportJob) -> dict[str, Path]:
    """Eval/ref image embeddings plus a text table over every hypernym synset."""
    job.out_dir.mkdir(parents=True, exist_ok=True)
    embedder = make_embedder(job.embedding_model, seed=job.seed)

    eval_images = _images_in(job.eval_image_root)
    eval_ids = [p.stem for p in eval_images]
    eval_vecs = np.array([embedder.embed_image(p) for p in eval_images], dtype=np.float32)
    write_emb1(job.out_dir / "eval.emb", job.out_dir / "eval.ids", eval_ids, eval_vecs)

    ref_ids, ref_vecs, ref_rows = [], [], []
    for label_dir in sorted(p for p in job.ref_image_root.iterdir() if p.is_dir()):
        for img in _images_in(label_dir):
            ref_ids.append(img.stem)
            ref_vecs.append(embedder.embed_image(img))
            ref_rows.append((img.stem, label_dir.name))
    write_emb1(
        job.out_dir / "ref.emb",
        job.out_dir / "ref.ids",
        ref_ids,
        np.array(ref_vecs, dtype=np.float32),
    )
    write_csv(job.out_dir / "ref_labels.csv", ref_rows)

    names = _synset_names(job)
    synsets = _hypernym_synsets(job)
    text_vecs = np.array(
        [embedder.embed_text(job.prompt_template.format(names.get(s, s))) for s in synsets],
        dtype=np.float32,
    )
    write_emb1(job.out_dir / "text.emb", job.out_dir / "text.ids", synsets, text_vecs)
    return {
        "eval_embeddings": job.out_dir / "eval.emb",
        "ref_embeddings": job.out_dir / "ref.emb",
        "text_embeddings": job.out_dir / "text.emb",
    }


def export_all(job: ExportJob) -> Path:
    """Full export: predictions, embeddings, bundled taxonomy, asset manifest.

    Returns the manifest path; the resulting directory is self-contained and
    passes the engine's validate command.
    """
    job.out_dir.mkdir(parents=True, exist_ok=True)
    export_predictions(job)
    export_embeddings(job)

    files = {
        "labels": "labels.json",
        "hypernyms": "hypernyms.csv",
        "eval_embeddings": "eval.emb",
        "eval_ids": "eval.ids",
        "ref_embeddings": "ref.emb",
        "ref_ids": "ref.ids",
        "ref_labels": "ref_labels.csv",
        "text_embeddings": "text.emb",
        "text_ids": "text.ids",
        "models": "models.json",
    }
    (job.out_dir / "labels.json").write_bytes(job.labels_path.read_bytes())
    (job.out_dir / "hypernyms.csv").write_bytes(job.hypernyms_path.read_bytes())
    if job.synset_names_path:
        (job.out_dir / "synsets.csv").write_bytes(Path(job.synset_names_path).read_bytes())
        files["synset_names"] = "synsets.csv"
    for key, src in job.extra_taxonomy.items():
        dest = f"{key}.json"
        (job.out_dir / dest).write_bytes(Path(src).read_bytes())
        files[key] = dest
    if job.eval_labels_path:
        (job.out_dir / "originals.csv").write_bytes(Path(job.eval_labels_path).read_bytes())
        files["originals"] = "originals.csv"

    embedder = make_embedder(job.embedding_model, seed=job.seed)
    provenance = getattr(embedder, "provenance", job.embedding_model)
    manifest = {
        "dataset_mode": "imagenet",
        "files": files,
        "embedding_provenance": f"{provenance}; prompt={job.prompt_template!r}",
        "checksums": {rel: sha256_of(job.out_dir / rel) for rel in sorted(set(files.values()))},
    }
    write_json(job.out_dir / "manifest.json", manifest)
    return job.out_dir / "manifest.json"
