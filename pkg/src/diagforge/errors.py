"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
it without a lookup table: 2 is a legitimate negative answer, 3 is bad
input, 4 is a tolerance or model-size failure.
"""


class DiagforgeError(Exception):
    exit_code = 1


class InvalidInput(DiagforgeError, ValueError):
    exit_code = 3


class NotNormal(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class DegenerateHull(InvalidInput):
    pass


class InfeasibleInput(InvalidInput):
    pass


class NecessityViolated(InvalidInput):
    """A target value lies outside the convex hull of the spectrum.

    ``index``, ``value`` and ``distance`` identify the offending entry.
    """

    def __init__(self, message, index=None, value=None, distance=None):
        super().__init__(message)
        self.index = index
        self.value = value
        self.distance = distance


class ToleranceUnreachable(DiagforgeError):
    exit_code = 4


class ModelTooCoarse(DiagforgeError):
    exit_code = 4


class Infeasible(DiagforgeError):
    """Linear feasibility problem has no solution.

    ``certificate`` is a :class:`diagforge.lp.FarkasCertificate` proving it.
    """

    exit_code = 2

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
