"""Exception hierarchy shared by all analysis modules."""

from __future__ import annotations


class FairflowError(Exception):
    """Base class for every error raised by the analyzer."""


# -- front end ---------------------------------------------------------------


class DslSyntaxError(FairflowError):
    def __init__(self, message: str, origin: str = "<inline>", line: int = 0,
                 column: int = 0, expected: tuple[str, ...] = ()):
        self.origin = origin
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        where = f"{origin}:{line}:{column}"
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(f"{where}: {message}")


class TypecheckError(FairflowError):
    pass


class UnboundVariable(TypecheckError):
    pass


class MissingReturn(TypecheckError):
    pass


class DomainMismatch(TypecheckError):
    pass


class WidthOverflowRisk(TypecheckError):
    pass


# -- spaces ------------------------------------------------------------------


class SpaceError(FairflowError):
    pass


class SpaceTooLarge(SpaceError):
    pass


class InvalidDistribution(SpaceError):
    pass


class NonUniformDistribution(SpaceError):
    pass


# -- analyses ----------------------------------------------------------------


class ZeroMassGroup(FairflowError):
    pass


class ZeroMassCondition(FairflowError):
    pass


class IncompleteTable(FairflowError):
    pass


class NonBinaryOutcome(FairflowError):
    pass


class ExposureMismatch(FairflowError):
    pass


class ProtectedVariableClamped(FairflowError):
    pass


class ModelError(FairflowError):
    """Malformed causal model (cycles, redefinitions, unknown names)."""


# -- engine ------------------------------------------------------------------


class WidthOverflow(FairflowError):
    pass


class SolverBudgetExceeded(FairflowError):
    pass


class BackendMismatch(FairflowError):
    """Enumeration and counting backends disagree. Always a bug."""

    def __init__(self, message: str, enum_count: int, count_count: int,
                 witness: tuple | None = None):
        self.enum_count = enum_count
        self.count_count = count_count
        self.witness = witness
        super().__init__(
            f"{message}: enumeration={enum_count} counting={count_count} witness={witness}"
        )


class ConfigError(FairflowError):
    pass
