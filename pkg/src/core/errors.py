"""
Error types for glod-bench
Every failure raised by the toolkit derives from GlodError
"""

from typing import Optional


class GlodError(Exception):
    """Base class for all toolkit errors"""


class IngestionError(GlodError):
    """A mandatory dataset file is missing or unreadable"""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class FormatError(GlodError):
    """Dataset file content does not follow the TU layout"""

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None):
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class ParameterError(GlodError, ValueError):
    """An operation was called with parameters outside its domain"""


class GenerationError(GlodError):
    """Random graph generation gave up after its retry cap"""


class RewiringError(GlodError):
    """Degree-preserving rewiring could not find a valid swap"""


class InputError(GlodError, ValueError):
    """A matrix argument is malformed (shape, symmetry, finiteness)"""


class InfeasibleError(GlodError):
    """The optimization problem has no feasible point for these parameters"""


class UndefinedAucError(GlodError):
    """ROC-AUC needs at least one outlier and one inlier"""


class ReportError(GlodError):
    """Results cannot be combined into a report"""


class UsageError(GlodError):
    """Command-line usage error (exit code 2)"""
