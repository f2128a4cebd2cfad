"""Exception types shared across the package."""


class SlicedAdcError(Exception):
    """Base class for all errors raised by slicedadc."""


class ConfigurationError(SlicedAdcError, ValueError):
    """A parameter or combination of parameters violates a precondition."""


class SampleRangeError(SlicedAdcError, ValueError):
    """A requested sample instant lies outside the record."""


class CalibrationError(SlicedAdcError, RuntimeError):
    """Pilot-tone calibration could not lock onto the expected tone."""
