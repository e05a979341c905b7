"""Exception types raised across the package."""


class DpSpecError(Exception):
    """Base class for errors raised by dpspec."""


class EnumerationTooLargeError(DpSpecError, ValueError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"domain would enumerate {count} datasets, above the cap of {cap}")
        self.count = count
        self.cap = cap


class ModeMismatchError(DpSpecError, ValueError):
    pass


class OutputSpaceMismatchError(DpSpecError, ValueError):
    pass


class DomainMismatchError(DpSpecError, ValueError):
    pass


class ParameterError(DpSpecError, ValueError):
    pass


class NotStochasticError(DpSpecError, ValueError):
    """A kernel row is not a probability distribution."""

    def __init__(self, message: str, dataset_id=None):
        super().__init__(message)
        self.dataset_id = dataset_id


class SchemaError(DpSpecError, ValueError):
    """A document does not match its schema; ``location`` is a JSON path."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class InvalidSpecError(DpSpecError, ValueError):
    def __init__(self, report):
        super().__init__("invalid specification: " + "; ".join(report.violations))
        self.report = report


class CompositionRefusedError(DpSpecError, ValueError):
    """Budgets of different flavors cannot be added."""
