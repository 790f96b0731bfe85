"""Exception hierarchy for posterml.

Every domain failure derives from PosterError so the CLI can map the whole
family onto exit code 1. Violations discovered by validators are data, not
exceptions; only contract breaches raise.
"""
from __future__ import annotations


class PosterError(Exception):
    """Base class for all posterml domain errors."""


# --- document parsing ---------------------------------------------------


class NoPosterContainer(PosterError):
    """No element carries the mandatory "poster" class."""


class MalformedMarkup(PosterError):
    """Markup is unbalanced beyond recoverable error handling."""


class MissingCanvasSize(PosterError):
    """The poster container has no resolvable width/height."""


class UnresolvableLength(PosterError):
    """A CSS length uses a unit the resolver does not support."""


# --- geometry dumps -----------------------------------------------------


class SchemaMismatch(PosterError):
    """A geometry dump is missing required fields or carries unknown ones."""


class InvariantViolation(PosterError):
    """Loaded data breaks a geometry invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"geometry invariants violated: {detail}")


# --- raster -------------------------------------------------------------


class DecodeError(PosterError):
    """The image file could not be decoded."""


class IoError(PosterError):
    """A file operation failed."""


class EmptyRegion(PosterError):
    """A crop region does not intersect the image."""


class DimensionMismatch(PosterError):
    """Two inputs that must agree in size do not."""


class ZeroVector(PosterError):
    """An embedding has zero norm, so cosine similarity is undefined."""


# --- asset index --------------------------------------------------------


class DuplicateAssetId(PosterError):
    """Two manifest records share an asset_id."""


class EmptyIndex(PosterError):
    """Retrieval was requested against an index with no records."""


# --- backends and pipeline ----------------------------------------------


class BackendError(PosterError):
    """A model backend call failed or returned an unusable reply."""


class PlanParseError(PosterError):
    """Base for structured-plan parse failures (retryable as a family)."""


class MissingSection(PlanParseError):
    def __init__(self, name: str):
        self.section = name
        super().__init__(f"mandatory section <{name}> is missing")


class DuplicateSection(PlanParseError):
    def __init__(self, name: str):
        self.section = name
        super().__init__(f"section <{name}> appears more than once")


class MalformedJson(PlanParseError):
    def __init__(self, section: str, detail: str):
        self.section = section
        self.detail = detail
        super().__init__(f"section <{section}> is not valid: {detail}")


class DanglingLayerRef(PlanParseError):
    def __init__(self, group_id: str, layer_id: int):
        self.group_id = group_id
        self.layer_id = layer_id
        super().__init__(
            f"group {group_id!r} references undeclared layer_id {layer_id}"
        )


class MissingBinding(PosterError):
    def __init__(self, layer_id: int):
        self.layer_id = layer_id
        super().__init__(f"no asset binding for image layer {layer_id}")


class ComposeRejected(PosterError):
    """Composer output failed the poster container lint."""

    def __init__(self, message: str, findings=()):
        self.findings = list(findings)
        super().__init__(message)


class RenderFailed(PosterError):
    """The renderer command exited nonzero or produced no outputs."""

    def __init__(self, message: str, stderr: str = ""):
        self.stderr = stderr
        super().__init__(message)


class RefinerRejected(PosterError):
    """Refiner output failed the poster container lint."""

    def __init__(self, message: str, findings=()):
        self.findings = list(findings)
        super().__init__(message)


class ParseError(PosterError):
    """A judge reply did not match the required score format."""
