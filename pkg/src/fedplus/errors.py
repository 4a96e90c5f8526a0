"""Exception hierarchy shared by every fedplus module."""


class FedPlusError(Exception):
    """Base class for all fedplus errors."""


class DimensionError(FedPlusError, ValueError):
    """Parameter vectors (or model lists) have mismatched lengths."""


class ConfigError(FedPlusError, ValueError):
    """A specification or experiment configuration is invalid."""


class AggregationError(FedPlusError, ValueError):
    """Aggregation was asked to combine an empty set of models."""


class DataError(FedPlusError, ValueError):
    """A batch is malformed, e.g. labels outside ``[0, classes)``."""


class NumericalError(FedPlusError, ArithmeticError):
    """A non-finite value appeared during training.

    ``party`` and ``round`` are filled in by the federation engine when the
    failure happens inside a run; ``step`` by the local solver.
    """

    def __init__(self, message, *, step=None, party=None, round=None):
        super().__init__(message)
        self.step = step
        self.party = party
        self.round = round

    def __str__(self):
        where = []
        if self.round is not None:
            where.append(f"round={self.round}")
        if self.party is not None:
            where.append(f"party={self.party}")
        if self.step is not None:
            where.append(f"step={self.step}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base
