"""Error taxonomy shared across the toolkit.

``RfmapError`` subclasses signal invalid inputs or configuration (CLI exit
code 1); plain ``OSError`` is left alone for I/O failures (exit code 2).
"""


class RfmapError(Exception):
    """Base class for all toolkit-level errors."""


class PlacementError(RfmapError):
    """Rejection sampling could not satisfy scene constraints."""


class ExtentMismatchError(RfmapError):
    """Grid extent does not match the scene extent."""


class DeviceInsideBuildingError(RfmapError):
    """A UE or BS lies strictly inside a building polygon."""


class LabelMismatchError(RfmapError):
    """Channel labels are inconsistent with the declared layout."""


class DimensionMismatchError(RfmapError):
    """Two maps that must share dimensions do not."""


class RatioError(RfmapError):
    """Split ratios are invalid (non-positive or do not sum to 1)."""


class CorruptFormatError(RfmapError):
    """A file failed magic/size/dimension checks while loading."""


class InvariantViolationError(RfmapError):
    """A loaded or constructed value violates its documented invariants."""
