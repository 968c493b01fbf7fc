"""Classifier and embedder backends.

Backend ids are strings:
  classifiers  "stub:<name>"            deterministic seeded linear head
               "torchvision:<arch>"     any torchvision.models constructor;
                                        random seeded init unless a weights
                                        path is supplied (downloads need
                                        network, which batch hosts may lack)
  embedders    "stub:dim=<d>"           seeded projection of pixels / text
               "open_clip:<model>/<tag>" real CLIP features when open_clip
                                        is installed

Every backend is deterministic for a fixed seed/weights, which makes
re-exports byte-identical and lets the engine's determinism checks pass.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

THUMB = 16  # stub backends look at a 16x16 grayscale thumbnail


def _image_array(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        small = img.convert("L").resize((THUMB, THUMB), Image.BILINEAR)
    return np.asarray(small, dtype=np.float64).reshape(-1) / 255.0


def _seed_from(*parts: str) -> int:
    digest = hashlib.sha256("\x00".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class ModelInfo:
    name: str
    architecture_family: str
    param_count: int
    pretrain_dataset: str
    pretrain_size_images: int


class StubClassifier:
    """Seeded linear head over thumbnail pixels; stands in for a zoo model."""

    def __init__(self, name: str, classes: list[str], seed: int = 0):
        self.name = name
        self.classes = list(classes)
        rng = np.random.default_rng(_seed_from("classifier", name, str(seed)))
        self.weights = rng.standard_normal((len(self.classes), THUMB * THUMB))

    def predict(self, image_path: Path) -> str:
        logits = self.weights @ _image_array(image_path)
        return self.classes[int(np.argmax(logits))]

    def info(self) -> ModelInfo:
        return ModelInfo(
            name=self.name,
            architecture_family="other",
            param_count=int(self.weights.size),
            pretrain_dataset="synthetic",
            pretrain_size_images=1,
        )


class TorchvisionClassifier:
    """Wraps a torchvision constructor; classes must be the sorted label ids."""

    def __init__(self, arch: str, classes: list[str], weights_path: str | None = None, seed: int = 0):
        import torch
        import torchvision.models as tvm

        self.name = f"torchvision-{arch}"
        self.classes = list(classes)
        self._torch = torch
        torch.manual_seed(seed)
        ctor = getattr(tvm, arch)
        self.model = ctor(weights=None, num_classes=len(self.classes))
        if weights_path:
            self.model.load_state_dict(torch.load(weights_path, map_location="cpu"))
        self.model.eval()

    def predict(self, image_path: Path) -> str:
        import torch
        import torchvision.transforms.functional as tvf

        with Image.open(image_path) as img:
            tensor = tvf.to_tensor(img.convert("RGB").resize((224, 224), Image.BILINEAR))
        with torch.no_grad():
            logits = self.model(tensor.unsqueeze(0))[0]
        return self.classes[int(torch.argmax(logits))]

    def info(self) -> ModelInfo:
        params = sum(int(p.numel()) for p in self.model.parameters())
        return ModelInfo(
            name=self.name,
            architecture_family="cnn",
            param_count=params,
            pretrain_dataset="untrained" ,
            pretrain_size_images=1,
        )


class StubEmbedder:
    """Deterministic joint image/text featurizer.

    Images: seeded projection of the grayscale thumbnail. Texts: a unit
    vector seeded from the prompt string. Purely synthetic, but stable across
    processes, which is all the format pipeline needs.
    """

    def __init__(self, dim: int = 32, seed: int = 0):
        self.dim = dim
        self.provenance = f"stub embedder dim={dim} seed={seed}"
        rng = np.random.default_rng(_seed_from("embedder", str(dim), str(seed)))
        self.projection = rng.standard_normal((dim, THUMB * THUMB))

    def embed_image(self, image_path: Path) -> np.ndarray:
        vec = self.projection @ _image_array(image_path)
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec + 1.0 / self.dim

    def embed_text(self, text: str) -> np.ndarray:
        rng = np.random.default_rng(_seed_from("text", text))
        vec = rng.standard_normal(self.dim)
        return vec / np.linalg.norm(vec)


class OpenClipEmbedder:
    """Real CLIP features; requires the open_clip_torch package and weights."""

    def __init__(self, model_name: str, pretrained: str):
        try:
            import open_clip
            import torch
        except ImportError as e:
            raise ImportError("open_clip_torch is required for CLIP embeddings") from e
        self._torch = torch
        self.model, _, self.preprocess = open_clip.create_model_and_transforms(
            model_name, pretrained=pretrained
        )
        self.tokenizer = open_clip.get_tokenizer(model_name)
        self.model.eval()
        self.provenance = f"open_clip {model_name}/{pretrained}"
        self.dim = self.model.visual.output_dim

    def embed_image(self, image_path: Path) -> np.ndarray:
        with Image.open(image_path) as img:
            tensor = self.preprocess(img.convert("RGB")).unsqueeze(0)
        with self._torch.no_grad():
            feat = self.model.encode_image(tensor)[0]
        return feat.numpy().astype(np.float64)

    def embed_text(self, text: str) -> np.ndarray:
        tokens = self.tokenizer([text])
        with self._torch.no_grad():
            feat = self.model.encode_text(tokens)[0]
        return feat.numpy().astype(np.float64)


def make_classifier(spec: str, classes: list[str], seed: int = 0):
    kind, _, arg = spec.partition(":")
    if kind == "stub":
        return StubClassifier(arg or "stub", classes, seed=seed)
    if kind == "torchvision":
        arch, _, weights = arg.partition("@")
        return TorchvisionClassifier(arch, classes, weights_path=weights or None, seed=seed)
    raise ValueError(f"unknown classifier backend {spec!r}")


def make_embedder(spec: str, seed: int = 0):
    kind, _, arg = spec.partition(":")
    if kind == "stub":
        dim = 32
        if arg.startswith("dim="):
            dim = int(arg[4:])
        return StubEmbedder(dim=dim, seed=seed)
    if kind == "open_clip":
        model_name, _, pretrained = arg.partition("/")
        return OpenClipEmbedder(model_name, pretrained)
    raise ValueError(f"unknown embedder backend {spec!r}")
