"""erratlas: explain every misprediction of an image classifier, or call it a model failure.

The cascade assigns each top-1 error the least severe applicable category:
overlap-correct, multi-label-correct, fine-grained, fine-grained
out-of-vocabulary, non-prototypical, spurious correlation, or (residually)
model failure. Aggregation then reports per-group category portions, accuracy
metrics, expert-comparison matrices, and OLS trend data.
"""

__version__ = "0.1.0"

from .annotations import AnnotationStore, ImageAnnotation, Verdict, correct_label_set, load_annotations
from .cascade import (
    CascadeConfig,
    CascadeContext,
    ErrorCategory,
    ErrorRecord,
    Mode,
    classify,
    classify_model,
    severity_audit,
)
from .cooccurrence import PairExtraction, extract_pairs, is_spurious
from .embeddings import EmbeddingMatrix, Neighbor, knn, read_embeddings, score_proposals, write_embeddings
from .errors import ErratlasError
from .fixtures import PlantedWorld, WorldParams, generate_world
from .label_space import (
    ClassInfo,
    Group,
    LabelSpace,
    ancestors_below_common,
    direct_siblings,
    is_overlap_correct,
    load_bundled_label_space,
    load_label_space,
    shares_superclass,
    superclass_stats,
)
from .manifest import AssetManifest, build_context, load_manifest, verify_checksums
from .metrics import (
    ModelMeta,
    ModelReport,
    SizeBucket,
    compare_categorizations,
    multi_label_accuracy,
    size_bucket,
    top1_accuracy,
)
from .trend import TrendFit, trend_fit
