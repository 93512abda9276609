"""Exception hierarchy. Each class maps to one CLI error category."""


class PulseConvError(Exception):
    category = "error"


class ConfigurationError(PulseConvError, ValueError):
    category = "config"


class ResolutionLossError(ConfigurationError):
    category = "config"


class UnrealizableCoefficientError(PulseConvError, ValueError):
    category = "plan"


class RegenerationOverflowError(PulseConvError, OverflowError):
    category = "simulation"


class DimensionMismatchError(PulseConvError, ValueError):
    category = "shape"


class DecompositionError(PulseConvError, ArithmeticError):
    category = "plan"


class KernelParseError(PulseConvError, ValueError):
    category = "parse"

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class UnknownKernelError(PulseConvError, KeyError):
    category = "lookup"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class PgmFormatError(PulseConvError, ValueError):
    category = "parse"

    def __init__(self, message, offset=None):
        prefix = f"byte {offset}: " if offset is not None else ""
        super().__init__(prefix + message)
        self.offset = offset
