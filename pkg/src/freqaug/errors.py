"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all freqaug errors."""


class FormatError(ToolkitError):
    """Malformed or unsupported on-disk data."""


class ShapeError(ToolkitError):
    """Mismatched image/spectrum/mask dimensions."""


class LabelError(ToolkitError):
    """Label out of range, or a same-class operation fed two classes."""


class DomainError(ToolkitError):
    """Input outside an operation's domain (empty dataset, negative amplitude, ...)."""


class TrainingDiverged(ToolkitError):
    """Loss became NaN/Inf during training."""
