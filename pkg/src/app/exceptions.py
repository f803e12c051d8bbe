"""
Error hierarchy for hoforms.

Every failure the services raise derives from HoformsError so the command
line can map it to exit status 1 and print diagnostics in one place.
"""
from typing import Any, Dict, Optional


class HoformsError(Exception):
    """Base class for all toolkit errors."""

    kind: str = "error"

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})

    def to_dict(self) -> Dict[str, Any]:
        """Serializable form used in error reports."""
        result: Dict[str, Any] = {'kind': self.kind, 'message': self.message}
        if self.diagnostics:
            result['diagnostics'] = self.diagnostics
        return result


class InputError(HoformsError):
    """Invalid arguments: vectors outside a subspace, singular generators, missing inclusions."""

    kind = "input"


class DomainError(InputError):
    """A point outside the domain of a function (Im z <= 0, cz + d = 0)."""

    kind = "domain"


class UnsupportedError(HoformsError):
    """An operation requested on an object it is not defined for."""

    kind = "unsupported"


class PreconditionError(HoformsError):
    """A documented precondition does not hold (e.g. non-unitary generators)."""

    kind = "precondition"


class NumericError(HoformsError):
    """Non-convergence or cancellation failure of a numeric method."""

    kind = "numeric"


class ParseError(HoformsError):
    """Malformed input file; carries the offending field and, if known, the line."""

    kind = "parse"

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None) -> None:
        diagnostics: Dict[str, Any] = {}
        if field is not None:
            diagnostics['field'] = field
        if line is not None:
            diagnostics['line'] = line
        super().__init__(message, diagnostics)
        self.field = field
        self.line = line
