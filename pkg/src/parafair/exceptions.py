"""Exception types shared across the package."""


class ParafairError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ParafairError, ValueError):
    """An argument violates a documented precondition."""


class InvalidSplitError(InvalidInputError):
    """A train/test split would leave one side empty."""


class EmptyDatasetError(InvalidInputError):
    """A ratings source produced no valid records."""


class DegenerateVectorError(InvalidInputError):
    """A vector operation received a zero-norm input."""


class DegenerateDistributionError(InvalidInputError):
    """A frequency table has too few positive counts to fit."""


class DivergenceError(ParafairError):
    """Training produced a non-finite loss."""

    def __init__(self, model: str, epoch: int, stage: str | None = None):
        self.model = model
        self.epoch = epoch
        self.stage = stage
        where = f"stage '{stage}', epoch {epoch}" if stage else f"epoch {epoch}"
        super().__init__(f"{model}: non-finite loss at {where}")


class ExperimentError(ParafairError):
    """A stage of an experiment run failed; names the stage."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}': {cause}")


class ConfigError(ParafairError):
    """An experiment config file failed to validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
