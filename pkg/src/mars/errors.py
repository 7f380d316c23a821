"""Exception hierarchy shared by the engine, search and CLI."""

from __future__ import annotations


class MarsError(Exception):
    """Base class for every error raised by this package."""


class UnknownIdError(MarsError, KeyError):
    """An action or value id that is not declared where it was looked up."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class StratumIndexError(MarsError, IndexError):
    pass


class ModelError(MarsError):
    """The evaluation model cannot be applied to this request."""


class GmmRequiresTotalOrder(ModelError):
    """Global maximum comparison needs every stratum to hold a single value."""

    def __init__(self, stratum_index: int, values: tuple[str, ...]):
        self.stratum_index = stratum_index
        self.values = values
        super().__init__(
            f"global-maximum requires a total order over values, but stratum "
            f"{stratum_index} holds {len(values)} values: {', '.join(values)}"
        )


class InvalidScenarioError(MarsError):
    """Raised when an operation that requires a valid scenario gets an invalid one."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


class SearchSizeError(MarsError):
    pass


class UnsatisfiableTargetError(MarsError):
    pass
