"""Exception hierarchy. Each class carries the CLI exit code for its failure class."""


class LcuError(Exception):
    exit_code = 1


class ParseError(LcuError):
    """Malformed input file or text form."""

    exit_code = 3

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionError(ParseError):
    """Operands disagree on qubit count or bit width."""


class PreconditionError(LcuError):
    exit_code = 4


class IndependenceError(PreconditionError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class CommutationError(PreconditionError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class PhaseError(PreconditionError):
    """A stored Pauli would need an imaginary phase."""


class UnsupportedGateError(PreconditionError):
    pass


class UndefinedStatisticError(PreconditionError):
    pass


class CapacityError(LcuError):
    exit_code = 5


class RegisterMismatchError(CapacityError):
    pass


class VerificationError(LcuError):
    exit_code = 6
