"""Exception hierarchy for radvar."""


class RadvarError(Exception):
    """Base class for all radvar errors."""


# convex analysis
class NonConvexData(RadvarError, ValueError):
    pass


class BadDomain(RadvarError, ValueError):
    pass


class OutsideDomain(RadvarError, ValueError):
    pass


class OutsideDualDomain(RadvarError, ValueError):
    pass


class TooFewSamples(RadvarError, ValueError):
    pass


class DegenerateG(RadvarError, ValueError):
    pass


class RatioUnreachable(RadvarError, ValueError):
    pass


class NotSuperlinear(RadvarError, ValueError):
    pass


class InconsistentParams(RadvarError, ValueError):
    pass


# problem data
class SchemaError(RadvarError, ValueError):
    pass


class HypothesisViolation(RadvarError, ValueError):
    pass


class IncompatibleProblem(RadvarError, ValueError):
    pass


class GridMismatch(RadvarError, ValueError):
    pass


class DimensionMismatch(RadvarError, ValueError):
    pass


# solvers
class DualDomainExceeded(RadvarError, ArithmeticError):
    pass


class NoConvergence(RadvarError, RuntimeError):
    """Raised when an iterative solver stops without meeting its tolerance.

    The best iterate is kept on ``result`` so callers can still report it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotConvexH(RadvarError, ValueError):
    pass


class Infeasible(RadvarError, ValueError):
    pass


class NonFinite(RadvarError, ArithmeticError):
    pass


class NotInPhiA(RadvarError, ValueError):
    pass


class PreconditionFailed(RadvarError, ValueError):
    pass


# certificates
class PrereqFailed(RadvarError, ValueError):
    pass


class G0Violated(RadvarError, ValueError):
    pass


class UnknownExample(RadvarError, KeyError):
    pass
