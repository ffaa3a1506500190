"""Exception types shared across the package."""


class OrthoLearnError(Exception):
    """Base class for all ortholearn errors."""


class ParseError(OrthoLearnError):
    """A point-cloud file could not be parsed."""

    def __init__(self, reason, line=None):
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{reason}{where}")


class DegenerateCloud(OrthoLearnError):
    """Cloud has too few points or collapses to a line/point."""


class IoError(OrthoLearnError):
    """Filesystem-level failure while reading a dataset or cloud."""


class EmptyDataset(OrthoLearnError):
    """Dataset root yielded no usable views."""


class InvalidMatrix(OrthoLearnError):
    """Matrix input does not satisfy the operation's preconditions."""


class EmptyView(OrthoLearnError):
    """Rendered view has no foreground pixels."""


class InvalidColorspace(OrthoLearnError):
    """Unknown colorspace identifier."""


class BackendError(OrthoLearnError):
    """An embedding backend failed on a view."""

    def __init__(self, message, view_id=None):
        self.view_id = view_id
        super().__init__(message if view_id is None else f"{message} [view={view_id}]")


class InvalidFeature(OrthoLearnError):
    """Feature vector is empty, non-finite or zero-norm where a norm is required."""


class LayoutError(OrthoLearnError):
    """Feature layout does not match the layout fixed by the memory."""


class LogError(OrthoLearnError):
    """Experiment log violates the event-ordering contract."""


class EmptyInput(OrthoLearnError):
    """An aggregate operation received an empty collection."""
