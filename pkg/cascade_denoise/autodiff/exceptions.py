class CascadeError(Exception):
    pass


class DimensionError(CascadeError):
    """Raised when tensor extents do not fit an operation."""


class DomainError(CascadeError):
    pass


class ParameterError(CascadeError):
    pass


class ParseError(CascadeError):
    def __init__(self, message, offset=None, line=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.offset = offset
        self.line = line


class DegenerateMatchError(CascadeError):
    """A zero-energy patch has no defined normalized cross-correlation."""


class GradientCheckError(CascadeError):
    pass


class DivergenceError(CascadeError):
    def __init__(self, step, loss):
        super().__init__(f"non-finite loss {loss} at step {step}")
        self.step = step
        self.loss = loss


class UndefinedCorrelationError(CascadeError):
    pass
