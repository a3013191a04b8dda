"""
Exception types shared by the Derm2Vec modules.

Every error raised on purpose derives from Derm2VecError, so the CLI can
report it cleanly and exit nonzero.
"""

from typing import Optional


class Derm2VecError(Exception):
    """Base class for all Derm2Vec errors."""


class DatasetParseError(Derm2VecError, ValueError):
    """A line of the dermatology data file could not be parsed."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class ShapeError(Derm2VecError, ValueError):
    """Operand shapes do not fit the requested operation."""


class NumericError(Derm2VecError, ArithmeticError):
    """A computation produced NaN or infinity."""


class SpecError(Derm2VecError, ValueError):
    """A network or model specification is invalid."""


class ConfigError(Derm2VecError, ValueError):
    """A configuration value is missing or invalid."""

    def __init__(self, field_path: str, reason: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {reason}")


class DivergenceError(Derm2VecError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, learning_rate: float, stage: Optional[str] = None):
        self.epoch = epoch
        self.learning_rate = learning_rate
        self.stage = stage
        prefix = f"[{stage}] " if stage else ""
        super().__init__(
            f"{prefix}training diverged at epoch {epoch} (learning_rate={learning_rate:g})"
        )

    def with_stage(self, stage: str) -> "DivergenceError":
        """Return a copy of this error tagged with a pipeline stage."""
        return DivergenceError(self.epoch, self.learning_rate, stage=stage)


class LeakageError(Derm2VecError, AssertionError):
    """A test-fold row was about to reach a fit call."""


class FoldError(Derm2VecError):
    """A model failed while fitting or predicting one cross-validation fold."""

    def __init__(self, fold_index: int, cause: BaseException):
        self.fold_index = fold_index
        self.cause = cause
        super().__init__(f"fold {fold_index}: {type(cause).__name__}: {cause}")
