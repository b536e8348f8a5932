"""Exception hierarchy shared across the package."""


class GastrsError(Exception):
    pass


class ParseError(GastrsError):
    """Malformed text input, with line and column when known."""

    def __init__(self, msg, text=None, pos=None, line=None, column=None):
        self.msg = msg
        self.line = line
        self.column = column
        if text is not None and pos is not None:
            before = text[:pos]
            self.line = (line if line is not None else 1) + before.count("\n")
            self.column = pos - (before.rfind("\n") + 1) + 1
        where = ""
        if self.line is not None:
            where = f"line {self.line}"
            if self.column is not None:
                where += f", column {self.column}"
            where += ": "
        super().__init__(where + msg)


class ValidationError(GastrsError):
    pass


class OrderMismatch(GastrsError):
    pass


class StateOrderMismatch(GastrsError):
    pass


class StackOpError(GastrsError):
    """A stack operation whose required decomposition does not exist."""


class EmptyStack(StackOpError):
    pass


class TopCharMismatch(StackOpError):
    pass


class AnnotationOrderMismatch(StackOpError):
    pass


class IndexOutOfRange(GastrsError):
    pass


class NotApplicable(GastrsError):
    pass


class FinalTargetViolation(GastrsError):
    pass


class NotNormalized(GastrsError):
    pass


class PreconditionViolated(GastrsError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class RuleShapeViolation(GastrsError):
    pass


class MemoryCapExceeded(GastrsError):
    pass
