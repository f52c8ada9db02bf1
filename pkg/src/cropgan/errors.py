"""Shared exception types for the toolkit."""


class CropganError(Exception):
    """Base class for all toolkit errors."""


class DatasetError(CropganError):
    """Raised for unusable datasets, manifests or annotation documents."""


class ShapeError(CropganError):
    """Raised when array shapes do not satisfy an operation's contract."""


class NumericalError(CropganError):
    """Raised when a computation fails numerically (non-finite loss,
    failed residual check, negative distance beyond tolerance)."""


class DependencyError(CropganError):
    """Raised when a pipeline command's prerequisite stage is missing."""


class ConfigError(CropganError):
    """Raised for invalid configuration values or files."""
