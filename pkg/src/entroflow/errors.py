"""Exception hierarchy shared by every entroflow module."""

from __future__ import annotations

__all__ = [
    "EntroflowError",
    "ParseError",
    "UnsupportedFormat",
    "SchemaVersionError",
    "InsufficientData",
    "InsufficientTimerResolution",
    "ShapeError",
    "TrainingDiverged",
    "FrozenModelRequired",
    "GeneratorDiverged",
    "ReseedRequired",
    "SeedLengthError",
    "RequestTooLarge",
    "DegenerateInput",
    "FitError",
    "UnknownTest",
    "ConfigError",
]


class EntroflowError(Exception):
    """Base class for all toolkit errors."""


class ParseError(EntroflowError):
    """A container file or byte payload could not be decoded."""


class UnsupportedFormat(ParseError):
    """The input is a recognised container but an unsupported variant."""


class SchemaVersionError(ParseError):
    """A container or report declares a format version we do not speak."""


class InsufficientData(EntroflowError):
    """Not enough input samples, sequences, or seeds for the request."""


class InsufficientTimerResolution(EntroflowError):
    """The monotonic clock is too coarse to carry timing jitter."""


class ShapeError(EntroflowError):
    """An array has the wrong dimensions for the operation."""


class TrainingDiverged(EntroflowError):
    """A loss or parameter became non-finite during training."""


class FrozenModelRequired(EntroflowError):
    """The operation needs a trained, frozen inner model."""


class GeneratorDiverged(EntroflowError):
    """The generator window picked up a non-finite value."""


class ReseedRequired(EntroflowError):
    """The reseed buffer or DRBG seed budget is exhausted."""


class SeedLengthError(EntroflowError):
    """Seed material is shorter than the consumer requires."""


class RequestTooLarge(EntroflowError):
    """A single output request exceeds the configured ceiling."""


class DegenerateInput(EntroflowError):
    """A statistic is undefined on this input (constant data, empty bins)."""


class FitError(EntroflowError):
    """A parametric distribution cannot be fitted to the sample."""


class UnknownTest(EntroflowError):
    """A battery was asked for a test name it does not provide."""


class ConfigError(EntroflowError):
    """A pipeline configuration file is invalid or incomplete."""
