"""Asset exporter for the erratlas engine: predictions, embeddings, manifests."""

__version__ = "0.1.0"

from .backends import (
    ModelInfo,
    OpenClipEmbedder,
    StubClassifier,
    StubEmbedder,
    TorchvisionClassifier,
    make_classifier,
    make_embedder,
)
from .jobs import ExportJob, export_all, export_embeddings, export_predictions
