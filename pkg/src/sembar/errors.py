"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class SembarError(Exception):
    """Base class for all toolkit-specific errors."""


# -- imaging ---------------------------------------------------------------

class UnsupportedFormat(SembarError):
    """File exists but is not a PNG or JPEG."""


class CorruptImage(SembarError):
    """File claims a supported format but cannot be decoded."""


class OutOfBounds(SembarError):
    """Drawing primitive or region exceeds image bounds."""


# -- autodg ----------------------------------------------------------------

class InvalidConfig(SembarError):
    """Generation config violates its invariants."""


class EmptyBackgroundSource(SembarError):
    """Background directory contains no usable images."""


class LabelDoesNotFit(SembarError):
    """Label text cannot be placed inside the available geometry."""


class ParseError(SembarError):
    """Manifest JSON is not parseable."""


class InvariantViolation(SembarError):
    """Manifest content violates a documented invariant."""


# -- extract ---------------------------------------------------------------

class InvalidScaleText(SembarError):
    """String does not satisfy the scale-text grammar."""


class NoCandidates(SembarError):
    """Association called with an empty candidate list."""


class InvalidPitch(SembarError):
    """Pixel pitch must be strictly positive."""


# -- ocr -------------------------------------------------------------------

class EmptyRegion(SembarError):
    """Recognition region contains no foreground pixels."""


# -- adapters --------------------------------------------------------------

class AdapterUnavailable(SembarError):
    """Adapter process cannot be spawned, died, or timed out."""


class AdapterProtocolError(SembarError):
    """Adapter produced a malformed or mismatched response."""


# -- metrics ---------------------------------------------------------------

class ManifestMismatch(SembarError):
    """Extraction results reference images absent from the manifest."""


# -- agent -----------------------------------------------------------------

class EmptyInput(SembarError):
    """Aggregation called with an empty list."""


class EndpointUnreachable(SembarError):
    """LLM endpoint could not be reached."""


class EndpointTimeout(SembarError):
    """LLM endpoint did not answer within the deadline."""


class MalformedReply(SembarError):
    """LLM endpoint answered with an unparseable body."""


# -- service ---------------------------------------------------------------

class NotFound(SembarError):
    """No stored record for the requested image id."""


class NotAnalyzed(SembarError):
    """Operation requires a prior successful analyze."""


class IndexOutOfRange(SembarError):
    """Correction targets a result index that does not exist."""


class TooLarge(SembarError):
    """Uploaded payload exceeds the size cap."""
