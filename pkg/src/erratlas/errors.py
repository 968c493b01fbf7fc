"""Exception hierarchy shared by all erratlas modules."""


class ErratlasError(Exception):
    """Base class for every error raised by this package."""


class ParseError(ErratlasError):
    """A data file is malformed (bad JSON/CSV/binary layout)."""


class ValidationError(ErratlasError):
    """Parsed data violates a structural invariant (dangling id, cycle, bad counts)."""


class UnknownSynset(ErratlasError):
    """A synset id does not resolve against the loaded label space."""


class UnknownImage(ErratlasError):
    """An image id is not present in the annotation store."""


class DuplicateImage(ErratlasError):
    """The same image id was annotated twice."""


class DuplicateVerdict(ErratlasError):
    """Two verdict rows exist for one (image, label) pair."""


class DimensionMismatch(ErratlasError):
    """Query vector dimensionality does not match the embedding matrix."""


class EmptyIndex(ErratlasError):
    """An embedding matrix has no rows."""


class MissingEmbedding(ErratlasError):
    """A required image or text embedding is absent from its index."""


class MissingTextEmbedding(MissingEmbedding):
    """A proposal synset has no row in the label-text index (incomplete asset prep)."""


class MissingMeta(ErratlasError):
    """A model referenced by records has no entry in the models manifest."""


class CategoryMismatch(ErratlasError):
    """An expert file uses a category name the engine does not know."""


class EmptyEvaluationSet(ErratlasError):
    """No images are available to compute an accuracy over."""


class DegenerateFit(ErratlasError):
    """A trend segment cannot be fit (fewer than 3 points, or no x variance)."""


class ChecksumMismatch(ErratlasError):
    """A manifest checksum does not match the file on disk."""
