"""Error hierarchy shared by the syntax, kernel, semantics and CLI layers."""

from __future__ import annotations


class DinatError(Exception):
    """Base class for every error raised by this package."""


class SyntaxError_(DinatError):
    """Ill-formed syntax object (formula, term, sequent or signature)."""


class UnboundVariable(SyntaxError_):
    def __init__(self, name: str, where: str = ""):
        self.name = name
        super().__init__(f"unbound variable {name!r}" + (f" in {where}" if where else ""))


class ArityMismatch(SyntaxError_):
    pass


class TypeMismatch(SyntaxError_):
    pass


class DuplicateName(SyntaxError_):
    pass


class CheckError(DinatError):
    """Base class for derivation-checking failures."""


class SchemaMismatch(CheckError):
    def __init__(self, node: str, reason: str):
        self.node = node
        self.reason = reason
        super().__init__(f"{node}: {reason}")


class VarianceViolation(CheckError):
    def __init__(self, node: str, variable: str, occurrence: str):
        self.node = node
        self.variable = variable
        self.occurrence = occurrence
        super().__init__(
            f"{node}: variable {variable!r} has a forbidden occurrence at {occurrence}"
        )


class MacroError(CheckError):
    """Macro parameters violate the macro's schema."""


class ModelError(DinatError):
    """Invalid finite category, atom table or functor table."""


class EvalError(DinatError):
    """Evaluation failed (missing interpretation, index mismatch, ...)."""


class SoundnessBug(DinatError):
    """An evaluated family failed its own dinaturality check.

    This is never expected; it indicates a bug in a rule's semantics.
    """


class EnumerationBound(DinatError):
    def __init__(self, required: int, bound: int, what: str = "enumeration"):
        self.required = required
        self.bound = bound
        super().__init__(f"{what} needs {required} candidates, bound is {bound}")


class ParseError(DinatError):
    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        loc = f"{line}:{column}"
        exp = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{loc}: {message}{exp}")
