"""Exception hierarchy shared across the package."""


class PartWeightsError(Exception):
    """Base class for all package errors."""


class DegenerateTriplet(PartWeightsError):
    """Three image points are collinear, so no affinity is defined."""


class SingularHomography(PartWeightsError):
    pass


class NumericalDegeneracy(PartWeightsError):
    """Every eigenvalue pair has a vanishing sum."""


class TooFewValidTriplets(PartWeightsError):
    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors


class IndexMismatch(PartWeightsError):
    pass


class AllTripletsMasked(PartWeightsError):
    pass


class EmptyGroup(PartWeightsError):
    pass


class NoOtherGroups(PartWeightsError):
    pass


class NotConverged(PartWeightsError):
    pass


class UnknownLabel(PartWeightsError):
    pass


class ParseError(PartWeightsError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class SchemaMismatch(PartWeightsError):
    """Joint labels in a file do not match the configured body model."""


class ConfigError(PartWeightsError):
    pass
