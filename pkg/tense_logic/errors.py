"""Exception hierarchy for the tense-logic evaluation engine."""

from __future__ import annotations

from typing import FrozenSet, Optional


class TenseLogicError(Exception):
    """Base class for all errors raised by this package."""


class InputError(TenseLogicError, ValueError):
    """Rejected input: malformed files, propositions or parameters."""


# linalg

class NotSquare(InputError):
    pass


class NotHermitian(InputError):
    pass


class DimensionCap(InputError):
    pass


# model

class IndexOutOfRange(InputError):
    pass


class NegativeTime(InputError):
    pass


class ParseError(InputError):
    """Model file could not be decoded."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None) -> None:
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(InputError):
    """Model violates a named invariant."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


# logic

class DslSyntaxError(InputError):
    """Proposition text does not match the grammar."""

    def __init__(self, message: str, line: int, column: int, expected: FrozenSet[str] = frozenset()) -> None:
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        text = f"{message} at line {line}, column {column}"
        if self.expected:
            text += f"; expected one of: {', '.join(sorted(self.expected))}"
        super().__init__(text)


class UnknownEvent(InputError):
    pass


class NormalizationBlowUp(InputError):
    pass


class StrictModeViolation(InputError):
    pass


# valuation

class DimensionMismatch(InputError):
    pass


class BlowUpGuard(InputError):
    pass


class RangeViolation(TenseLogicError, RuntimeError):
    """Inclusion-exclusion result left [0, 1]: a CH violation or a bug."""

    def __init__(self, raw_value: float, tolerance: float) -> None:
        self.raw_value = raw_value
        self.tolerance = tolerance
        super().__init__(
            f"truth value {raw_value!r} outside [0, 1] beyond tolerance {tolerance:g} "
            f"(consistent-histories condition likely violated)"
        )


class NonCHWarning(UserWarning):
    """ch_fast evaluation produced an imaginary residual above tolerance."""


# consistency

class LengthGuard(InputError):
    pass


# verify

class NotCommutingFamily(InputError):
    pass


class BadTimeOrder(InputError):
    pass
