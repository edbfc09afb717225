"""
Error types raised by the toolkit.

None of these derive from ValueError, so they pass through pydantic
validators untouched instead of being folded into a ValidationError.
"""


class PolygamyError(Exception):
    """Base class for every library error; maps to CLI exit code 2."""


# linalg
class NotHermitian(PolygamyError):
    pass


class NoConvergence(PolygamyError):
    pass


class NotPSD(PolygamyError):
    pass


class BadIndex(PolygamyError):
    pass


class WrongDimension(PolygamyError):
    pass


# states
class NotNormalized(PolygamyError):
    pass


class BadParameter(PolygamyError):
    pass


class InvariantViolation(PolygamyError):
    pass


class ParseError(PolygamyError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


# measures / roof / exponents
class DomainError(PolygamyError):
    pass


class UnsupportedGlobalMeasure(PolygamyError):
    pass


class RankTooHigh(PolygamyError):
    pass


class HypothesisNotMet(PolygamyError):
    pass


class NoSignChange(PolygamyError):
    pass


class DegenerateGlobal(PolygamyError):
    pass


# cli
class BadConfig(PolygamyError):
    pass
