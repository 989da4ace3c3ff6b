"""Exception hierarchy shared by all zetaflow modules."""

from __future__ import annotations


class ZetaflowError(Exception):
    """Base class for numeric failures (CLI exit code 3)."""


class PoleAtOne(ZetaflowError):
    pass


class ToleranceUnreachable(ZetaflowError):
    pass


class NotPrime(ZetaflowError, ValueError):
    pass


class NotSymmetric(ZetaflowError, ValueError):
    pass


class NotInNullSpace(ZetaflowError, ValueError):
    pass


class ConstructionUnvalidated(ZetaflowError):
    pass


class NoFlowParameter(ZetaflowError, ValueError):
    pass


class BoundaryZero(ZetaflowError):
    pass


class PoleInside(ZetaflowError):
    pass


class NewtonDiverged(ZetaflowError):
    """Newton iteration failed; ``unresolved`` lists cells a scan could not settle."""

    def __init__(self, message: str, unresolved=None, zeros=None):
        super().__init__(message)
        self.unresolved = list(unresolved or [])
        self.zeros = list(zeros or [])


class LostZero(ZetaflowError):
    def __init__(self, message: str, param: float | None = None, z: complex | None = None):
        super().__init__(message)
        self.param = param
        self.z = z


class CoefficientPole(ZetaflowError):
    def __init__(self, message: str, phi: float):
        super().__init__(message)
        self.phi = phi


class WrongFlow(ZetaflowError, ValueError):
    pass
