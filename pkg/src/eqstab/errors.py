"""Exception hierarchy shared by all eqstab modules."""


class EqstabError(Exception):
    """Base class for every error raised by eqstab."""


class ExprSyntaxError(EqstabError, ValueError):
    """Malformed expression text.  ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class VariableIndexError(ExprSyntaxError):
    pass


class DomainError(EqstabError, ArithmeticError):
    """An expression was evaluated outside its admissible region.

    ``expr`` holds the offending sub-expression (printed form).
    """

    def __init__(self, message, expr=None):
        if expr is not None:
            message = f"{message} in '{expr}'"
        super().__init__(message)
        self.expr = expr


class SystemDefinitionError(EqstabError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(EqstabError, RuntimeError):
    pass


class StepSizeError(EqstabError, RuntimeError):
    def __init__(self, message, t=None, x=None):
        super().__init__(message)
        self.t = t
        self.x = x


class PreconditionError(EqstabError, ValueError):
    pass
