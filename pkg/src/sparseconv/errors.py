"""Exception hierarchy shared by the library and the CLI."""


class SparseConvError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SparseConvError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BoundError(SparseConvError):
    """An input exceeds the exact-arithmetic budget of the engine."""


class SchemeError(SparseConvError):
    """No admissible reduction parameters, or a broken table invariant."""


class CompactionError(SparseConvError):
    """The prime pool failed to produce a separating prime."""


class VerifyMismatch(SparseConvError):
    def __init__(self, index: int, fast: int, naive: int):
        self.index = index
        super().__init__(f"fast and naive results differ at index {index}: {fast} != {naive}")
