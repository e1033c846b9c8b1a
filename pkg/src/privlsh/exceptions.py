"""Exception types shared across the package.

All parameter/shape problems derive from ``ValueError`` so callers that do
not care about the fine-grained distinction can catch the builtin.
"""


class ZeroVectorError(ValueError):
    """An operation that needs a direction received the zero vector."""


class DimensionMismatchError(ValueError):
    """Two vectors or bitstrings of unequal length were combined."""


class InvalidParamsError(ValueError):
    """A numeric parameter is outside its documented domain."""


class OutOfRangeError(InvalidParamsError):
    """A distance argument is outside the interval it is defined on."""


class InfeasibleError(ValueError):
    """No parameter value can satisfy the requested constraint.

    Raised e.g. when no tail-probability slack in (0, 1 - d] reaches the
    requested failure probability.  Deliberately an exception rather than a
    sentinel float: an infeasible bound must not flow into arithmetic.
    """


class UnknownIdError(LookupError):
    """A query id is not present in the dataset."""


class EmptyDatasetError(ValueError):
    """A dataset ended up with no usable rows."""


class LengthMismatchError(ValueError):
    """Two neighbor lists that must have equal length do not."""


class ParseError(ValueError):
    """An input file line could not be parsed.

    Attributes:
        line: 1-based line number of the offending record.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
