"""Exception hierarchy for the rough forms toolkit."""


class RoughFormsError(Exception):
    """Base class for every error raised by this package."""


class DegreeError(RoughFormsError, ValueError):
    """A germ, chain or simplex has the wrong degree for the operation."""


class DimensionError(RoughFormsError, ValueError):
    """Ambient dimensions of points, maps or simplices do not match."""


class PermutationError(RoughFormsError, ValueError):
    """A permutation is malformed or has the wrong size."""


class ParameterError(RoughFormsError, ValueError):
    """An option or numeric parameter is outside its admissible range."""


class BudgetError(RoughFormsError):
    """A dyadic recursion would exceed the cost cap k * n <= 30."""


class DivergentGaugeError(RoughFormsError):
    """The Dini series of a gauge does not converge for the requested rate."""


class InsufficientDataError(RoughFormsError):
    """Too few nonzero increments to fit a decay rate."""


class OracleError(RoughFormsError):
    """A classical quadrature oracle failed to reach its tolerance."""


class NonConvergentError(RoughFormsError):
    """Sewing was classified as divergent.

    Attributes:
        report: The SewReport of the failed run
        stage: Which stage failed ("young", "zust-outer", "zust-inner", ...)
    """

    def __init__(self, message, report=None, stage=None):
        super().__init__(message)
        self.report = report
        self.stage = stage


class ExpressionError(RoughFormsError):
    """Base class for expression language errors."""


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text.

    Attributes:
        position: 0-based character offset of the offending token
        expected: Description of what the parser wanted there
    """

    def __init__(self, position, expected, found=None):
        self.position = position
        self.expected = expected
        self.found = found
        detail = f", found {found!r}" if found is not None else ""
        super().__init__(f"syntax error at position {position}: expected {expected}{detail}")


class UnknownIdentifierError(ExpressionError):
    """A name that is neither a variable nor a known function."""

    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier {name!r}" + (f" at position {position}" if position is not None else ""))


class ArityError(ExpressionError):
    """A function was called with the wrong number of arguments."""

    def __init__(self, name, expected, got):
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(f"{name}() takes {expected} argument(s), got {got}")


class DomainError(ExpressionError):
    """Evaluation left the domain of a function (log of a nonpositive number, ...)."""
