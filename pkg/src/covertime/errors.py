"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class CovertimeError(Exception):
    exit_code = 1


class UsageError(CovertimeError):
    exit_code = 2


class ParseError(UsageError):
    """Malformed graph, chain or partition file."""


class ChainValidationError(CovertimeError):
    """Row sums, probability ranges or stationarity residuals out of tolerance."""

    exit_code = 2


class BudgetError(CovertimeError):
    """Exact computation would exceed its state budget."""

    exit_code = 3


class PreconditionError(CovertimeError):
    exit_code = 4


class DegenerateVertexError(PreconditionError):
    pass


class NotIrreducibleError(PreconditionError):
    pass


class EscapingMassError(PreconditionError):
    pass


class DegenerateLambdaError(PreconditionError):
    pass


class DegenerateHorizonError(PreconditionError):
    pass


class NotATreeError(PreconditionError):
    pass


class ScaleSelectionError(PreconditionError):
    """No admissible scale index within the cap."""


class StructuralError(PreconditionError):
    """Malformed partition: blocks overlap, miss vertices, or U_i not inside V_i."""


class InternalVerificationError(CovertimeError):
    """A construction produced output that failed its own exact re-check."""

    exit_code = 5
