"""Exception hierarchy shared across the package.

Every error raised by this package derives from :class:`NdvError`, so callers
can catch one type at the top of a pipeline. Names are part of the public
contract and are grouped below by the subsystem that raises them.
"""

from __future__ import annotations


class NdvError(Exception):
    """Base class for all errors raised by this package."""


# --- corpus ingestion -------------------------------------------------------

class SpecParseError(NdvError):
    """Corpus spec string does not follow `dataset[:years[:states]]`."""


class IoError(NdvError):
    """A referenced file is missing or unreadable."""


class ManifestError(NdvError):
    """Manifest content is structurally invalid (bad keys, duplicate paths)."""


class ManifestVersionError(ManifestError):
    """Manifest schema_version is not the one this code understands."""


class ValidationError(NdvError):
    """A corpus row failed article validation."""


class MissingField(ValidationError):
    """A required article field is absent (or the row is not an object)."""


class BadDate(ValidationError):
    """Article date is not a valid ISO-8601 calendar date."""


class EmptyText(ValidationError):
    """Article text is present but empty."""


class CorruptFileError(NdvError):
    """More than half of a corpus file's lines failed validation."""


# --- NER, masking, backends -------------------------------------------------

class AnnotationError(NdvError):
    """Token annotations violate their invariants (overlap, order, tagset)."""


class SpanOverlapError(NdvError):
    """Entity spans passed to masking overlap each other."""


class SpanBoundsError(NdvError):
    """An entity span extends outside the text it annotates."""


class BackendUnavailable(NdvError):
    """A model backend could not be reached after the retry policy ran out."""


class ProtocolError(NdvError):
    """A model backend replied with something outside the wire contract."""


# --- embeddings and stores --------------------------------------------------

class ZeroVectorError(NdvError):
    """L2 normalization was asked to normalize an all-zero vector."""


class InvariantError(NdvError):
    """An embedding store violates its invariants (norms, id uniqueness)."""


class FormatError(NdvError):
    """A store file has a bad magic/version or is truncated/oversized."""


class CorruptStoreError(NdvError):
    """A store file parsed but holds rows that are not unit-norm."""


# --- search index -----------------------------------------------------------

class DimMismatchError(NdvError):
    """Vector dimensions disagree (across shards, or query vs index)."""


class DuplicateIdError(NdvError):
    """The same corpus id appears in more than one index shard."""


class EmptyIndex(NdvError):
    """An index was built from an empty shard list."""


class BadK(NdvError):
    """Requested k < 1."""


# --- pipeline and evaluation ------------------------------------------------

class StageError(NdvError):
    """A pipeline stage failed; carries the stage name and article id(s)."""

    def __init__(self, stage: str, article_ids, cause: Exception):
        self.stage = stage
        self.article_ids = list(article_ids)
        self.cause = cause
        shown = ", ".join(self.article_ids[:3])
        if len(self.article_ids) > 3:
            shown += ", ..."
        super().__init__(f"stage '{stage}' failed on article(s) [{shown}]: {cause}")


class NoNegativeAvailable(NdvError):
    """Hard-negative mining found no legal candidate in the pool."""


class DomainError(NdvError):
    """A metric input is outside its domain (e.g. negative precision)."""


class ShapeError(NdvError):
    """Paired evaluation inputs have mismatched lengths."""


class EmptyAnnotationError(NdvError):
    """An annotation sheet with no records cannot yield a rate."""
