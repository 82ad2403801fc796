"""Exception types shared across the package."""


class SegError(Exception):
    """Base class for all package errors."""


class EmptyInput(SegError):
    pass


class FormatError(SegError):
    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class OffsetError(FormatError):
    pass


class NoPath(SegError):
    pass


class AlignError(SegError):
    pass


class ShapeError(SegError, ValueError):
    def __init__(self, kernel, *shapes):
        shown = " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{kernel}: incompatible shapes {shown}")
        self.kernel = kernel
        self.shapes = shapes


class NonFiniteError(SegError, FloatingPointError):
    pass


class EmptyCorpus(SegError):
    pass


class ConfigError(SegError):
    pass


class CheckpointError(SegError):
    pass
