"""Typed errors shared across the package.

``DataError`` covers anything wrong with inputs (files, manifests, shapes); the
CLI maps it to exit code 2. ``NumericError`` covers numeric failures during
fitting; the CLI maps it to exit code 3.
"""


class DataError(ValueError):
    pass


class NumericError(RuntimeError):
    pass


# pcio
class MalformedHeader(DataError):
    pass


class MalformedBody(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class TruncatedFile(DataError):
    pass


class DegenerateMesh(DataError):
    pass


class UnknownMagic(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyDataset(DataError):
    pass


class UnknownClassName(DataError):
    pass


# serialized models
class VersionMismatch(DataError):
    pass


class ChecksumFailure(DataError):
    pass


# geometry / pipeline
class TooManyRequested(DataError):
    pass


class KTooLarge(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class InsufficientPoints(DataError):
    pass


class EmptyMatrix(DataError):
    pass


class ChannelOutOfRange(DataError):
    pass


# classify
class DegenerateLabels(DataError):
    pass


class EmptyTestSet(DataError):
    pass


# numeric
class TooFewSamples(NumericError):
    pass


class NonFiniteAttributes(NumericError):
    pass


class DimensionChainError(NumericError):
    pass
