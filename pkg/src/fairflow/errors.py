"""Exception hierarchy shared by every fairflow component."""

from __future__ import annotations


class FairflowError(Exception):
    """Base class for all errors raised by fairflow."""


# -- data loading and splitting -------------------------------------------------


class DataError(FairflowError):
    pass


class SchemaViolation(DataError):
    """The column schema itself is malformed (duplicate names, wrong label count...)."""


class MissingColumn(DataError):
    pass


class TypeViolation(DataError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyDataset(DataError):
    pass


class LabelNotBinary(DataError):
    pass


class InsufficientGroups(DataError):
    pass


class InvalidSplitSpec(DataError):
    pass


class UnmappedSplitValue(DataError):
    pass


class DegenerateSplit(DataError):
    pass


class InvalidFractions(DataError):
    pass


class DatasetLoadError(DataError):
    """Raised by the experiment runner when a configured dataset cannot be loaded."""


# -- auditing --------------------------------------------------------------------


class AuditError(FairflowError):
    pass


class UnknownGroup(AuditError):
    pass


class UnknownMetric(AuditError):
    pass


class ZeroReferenceMetric(UserWarning):
    """Reference metric is 0 while another group's is positive; disparity is +inf."""


# -- methods ---------------------------------------------------------------------


class MethodError(FairflowError):
    pass


class NotFitted(MethodError):
    pass


class NonFiniteLoss(MethodError):
    def __init__(self, iteration: int, value: float):
        super().__init__(
            f"objective became non-finite ({value}) at iteration {iteration}; "
            "learning rate is likely too high"
        )
        self.iteration = iteration
        self.value = value


class EmptyGroupAtFit(MethodError):
    pass


class NoPositivesInGroup(MethodError):
    pass


class InvalidSpace(MethodError):
    """Bad search-space dimension; ``field`` names the offending key (``low``, ``grid``...) when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


# -- optimisation / experiments --------------------------------------------------


class GridTooSmall(FairflowError):
    pass


class InfiniteGrid(FairflowError):
    pass


class TrialFailed(FairflowError):
    pass


class ConfigError(FairflowError):
    """Configuration problem; ``errors`` holds ``(field_path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]] | str):
        if isinstance(errors, str):
            errors = [("", errors)]
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" if p else m for p, m in self.errors))


class SchemaError(ConfigError):
    pass


class DuplicateName(ConfigError):
    pass


class UnknownKind(ConfigError):
    """A ``kind`` that is not in the method registry."""


class StoreExists(FairflowError):
    pass


class TooFewTrials(FairflowError):
    pass


class RenderError(FairflowError):
    pass
