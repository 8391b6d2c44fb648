"""Exception hierarchy shared by all subsystems."""


class ProverError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class PositionError(ProverError):
    """A term position does not resolve, or conflicts with another."""

    code = "position-error"


class TermTypeError(ProverError):
    """A term construction or replacement would violate typing."""

    code = "type-error"


class ParseError(ProverError):
    """Malformed formula, position, or argument-map text."""

    code = "input-error"


class TacticError(ProverError):
    """A tactic's applicability check failed.

    ``slot`` names the offending formal argument when known.
    """

    code = "tactic-error"

    def __init__(self, message, slot=None):
        super().__init__(message)
        self.slot = slot


class FocusError(ProverError):
    """A focus selection does not denote an open line."""

    code = "focus-error"


class ComparisonError(ProverError):
    """Argument maps of different commands were compared."""

    code = "comparison-error"


class ClassError(ProverError):
    """An operation received input outside its logic class."""

    code = "class-error"


class ResourceLimitError(ProverError):
    """A computation refused to run because it exceeds its resource bound."""

    code = "resource-limit"


class ScriptError(ProverError):
    """A proof script failed to parse or an expectation did not hold."""

    code = "script-error"
