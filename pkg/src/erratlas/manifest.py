"""Asset manifests: what files make up a dataset and how to load them.

A manifest is a JSON object {dataset_mode, files, embedding_provenance,
checksums, strict_imagenet?} whose file paths are relative to the manifest's
directory. The default manifest location is $ERRATLAS_ASSETS/manifest.json.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .annotations import AnnotationStore, load_annotations
from .cascade import CascadeConfig, CascadeContext, Mode
from .cooccurrence import PairExtraction, extract_pairs, read_pairs_csv
from .embeddings import EmbeddingMatrix, read_embeddings
from .errors import ChecksumMismatch, ParseError, ValidationError
from .label_space import LabelSpace, load_label_space

ENV_ASSET_ROOT = "ERRATLAS_ASSETS"

TAXONOMY_KEYS = ("labels", "overlap", "superclasses", "hypernyms")
ANNOTATION_KEYS = ("originals", "multilabel", "problematic", "non_prototypical", "real_labels")
EMBEDDING_KEYS = (
    "ref_embeddings",
    "ref_ids",
    "ref_labels",
    "eval_embeddings",
    "eval_ids",
    "text_embeddings",
    "text_ids",
)


@dataclass(frozen=True)
class AssetManifest:
    path: Path
    root: Path
    dataset_mode: Mode
    files: dict[str, Path]
    embedding_provenance: str | None
    checksums: dict[str, str]
    strict_imagenet: bool = False

    def has(self, *keys: str) -> bool:
        return all(k in self.files for k in keys)

    def file(self, key: str) -> Path:
        try:
            return self.files[key]
        except KeyError:
            raise ValidationError(f"manifest {self.path} lists no {key!r} file") from None


def default_manifest_path() -> Path | None:
    root = os.environ.get(ENV_ASSET_ROOT)
    return Path(root) / "manifest.json" if root else None


def load_manifest(path: str | Path | None = None) -> AssetManifest:
    if path is None:
        path = default_manifest_path()
        if path is None:
            raise ValidationError(f"no manifest path given and ${ENV_ASSET_ROOT} is unset")
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"{path}: {e}") from e
    root = path.parent
    files = {}
    for key, rel in data.get("files", {}).items():
        p = root / rel
        if not p.exists():
            raise ValidationError(f"{path}: listed file does not exist: {rel}")
        files[key] = p
    try:
        mode = Mode(data.get("dataset_mode", "imagenet"))
    except ValueError as e:
        raise ParseError(f"{path}: bad dataset_mode") from e
    return AssetManifest(
        path=path,
        root=root,
        dataset_mode=mode,
        files=files,
        embedding_provenance=data.get("embedding_provenance"),
        checksums=data.get("checksums", {}),
        strict_imagenet=bool(data.get("strict_imagenet", False)),
    )


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def verify_checksums(manifest: AssetManifest) -> None:
    for rel, expected in sorted(manifest.checksums.items()):
        actual = sha256_of(manifest.root / rel)
        if actual != expected:
            raise ChecksumMismatch(f"{rel}: sha256 {actual} != manifest {expected}")


def load_space(manifest: AssetManifest) -> LabelSpace:
    return load_label_space(
        manifest.file("labels"),
        manifest.file("overlap"),
        manifest.file("superclasses"),
        manifest.file("hypernyms"),
        strict_imagenet=manifest.strict_imagenet,
    )


def load_store(manifest: AssetManifest, space: LabelSpace) -> AnnotationStore:
    def opt(key: str) -> Path | None:
        return manifest.files.get(key)

    return load_annotations(
        space,
        manifest.file("originals"),
        multilabel_path=opt("multilabel"),
        problematic_path=opt("problematic"),
        non_prototypical_path=opt("non_prototypical"),
        real_labels_path=opt("real_labels"),
    )


def load_pairs(manifest: AssetManifest, space: LabelSpace, store: AnnotationStore) -> PairExtraction:
    """Use a precomputed pairs file when listed, else mine on the fly."""
    if manifest.has("pairs"):
        return read_pairs_csv(manifest.file("pairs"))
    if store.real_labels:
        return extract_pairs(store.real_labels, set(store.annotations), space)
    return PairExtraction.empty()


def _optional_index(manifest: AssetManifest, bin_key: str, ids_key: str) -> EmbeddingMatrix | None:
    if manifest.has(bin_key, ids_key):
        return read_embeddings(manifest.file(bin_key), manifest.file(ids_key))
    return None


def load_ref_labels(manifest: AssetManifest) -> dict[str, str]:
    import csv

    out: dict[str, str] = {}
    if not manifest.has("ref_labels"):
        return out
    with open(manifest.file("ref_labels"), newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if row:
                out[row[0]] = row[1]
    return out


def build_context(manifest: AssetManifest, config: CascadeConfig | None = None) -> CascadeContext:
    """Load every listed asset into an immutable cascade context."""
    space = load_space(manifest)
    store = load_store(manifest, space)
    pairs = load_pairs(manifest, space, store)
    if config is None:
        config = CascadeConfig(mode=manifest.dataset_mode)
    return CascadeContext(
        space=space,
        store=store,
        pairs=pairs,
        config=config,
        ref_index=_optional_index(manifest, "ref_embeddings", "ref_ids"),
        ref_labels=load_ref_labels(manifest),
        eval_index=_optional_index(manifest, "eval_embeddings", "eval_ids"),
        text_index=_optional_index(manifest, "text_embeddings", "text_ids"),
    )
