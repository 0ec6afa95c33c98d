"""Exception types shared across the package."""


class RotsyncError(Exception):
    """Base class for all rotsync errors."""


class RankDeficientInput(RotsyncError):
    """A matrix that must have full rank is numerically rank-deficient."""


class InvalidRange(RotsyncError):
    """An angle range violates 0 <= min <= max <= 180 degrees."""


class EmptyInput(RotsyncError):
    """An operation that needs at least one element received none."""


class SingularProjection(RotsyncError):
    """The random projection basis is numerically singular."""


class BadBlockShape(RotsyncError):
    """A blockwise operation needs dimensions divisible by 3."""


class DuplicateEdge(RotsyncError):
    """The same frame pair appears more than once in a measurement set."""


class DisconnectedGraph(RotsyncError):
    """The measurement graph does not span a single connected component."""


class ZeroDegreeNode(RotsyncError):
    """A node has zero total weight in the measurement graph."""


class ExtractionDegenerate(RotsyncError):
    """A block extracted from the low-rank factor is rank-deficient."""


class LengthMismatch(RotsyncError):
    """Two rotation lists that must have equal length do not."""


class InvalidConfig(RotsyncError):
    """A synthetic-instance configuration violates its constraints."""


class FileFormatError(RotsyncError):
    """A data file does not conform to its documented format."""
