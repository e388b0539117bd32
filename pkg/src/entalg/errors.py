"""Exception types shared across the package.

Every error carries a stable ``code`` string so the CLI can map failures
to exit codes and machine-readable reports without string matching.
"""


class EntalgError(Exception):
    code = "ERROR"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class UnknownFrequency(EntalgError):
    code = "UNKNOWN_FREQUENCY"


class UnknownLabel(EntalgError):
    code = "UNKNOWN_LABEL"


class DimensionMismatch(EntalgError):
    code = "DIMENSION_MISMATCH"


class NotGeneric(EntalgError):
    code = "NOT_GENERIC"


class CapacityExceeded(EntalgError):
    code = "CAPACITY_EXCEEDED"


class BadCutoff(EntalgError):
    code = "BAD_CUTOFF"


class OrderTooLarge(EntalgError):
    code = "ORDER_TOO_LARGE"


class RepresentationMismatch(EntalgError):
    code = "REPRESENTATION_MISMATCH"


class ConfigError(EntalgError):
    code = "CONFIG_ERROR"
