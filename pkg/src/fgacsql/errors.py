"""Exception hierarchy shared across the toolchain."""


class FgacError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidModel(FgacError):
    """A data model violates its structural invariants."""


class InvalidScenario(FgacError):
    """A scenario does not fit its data model."""


class OclSyntaxError(FgacError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class OclTypeError(FgacError):
    """An expression is outside the typed constraint subset."""


class UnboundKeyword(FgacError):
    """Evaluation hit a keyword the binding does not cover."""


class UnknownRole(FgacError):
    """A role is not declared in the security model."""


class SqlSyntaxError(FgacError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnsupportedFeature(FgacError):
    """SQL text uses a construct outside the supported subset."""


class UnknownTable(FgacError):
    pass


class UnknownColumn(FgacError):
    pass


class Uncompilable(FgacError):
    """No SQL implementation exists for a constraint construct."""


class UnsupportedQuery(FgacError):
    """A resource access cannot be staged by the generation scheme."""


class Untranslatable(FgacError):
    """A constraint construct has no first-order translation."""


class InconsistentChecks(FgacError):
    """A proof outcome references a check the procedure does not contain."""


class SolverUnavailable(FgacError):
    """The configured SMT solver executable cannot be run."""


class SolverProtocolError(FgacError):
    def __init__(self, raw_output: str):
        super().__init__(f"unexpected solver output: {raw_output!r}")
        self.raw_output = raw_output


class SqlRuntimeError(FgacError):
    """Execution failure inside the in-memory engine (bad table, column, arity)."""


class SecurityViolation(FgacError):
    """An authorization check failed while executing a secured procedure."""
