"""Exception hierarchy shared by all modules."""


class NHQuarticError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgumentError(NHQuarticError, ValueError):
    pass


class ResourceLimitError(NHQuarticError):
    pass


class InternalConsistencyError(NHQuarticError):
    """A structural invariant (e.g. a parity selection rule) was violated."""


class SolverFailureError(NHQuarticError):
    pass


class BrokenConjugacyError(NHQuarticError):
    """A complex eigenvalue has no partner close to its complex conjugate."""


class MethodDisagreementError(NHQuarticError):
    pass


class PrecisionNotReachedError(NHQuarticError):
    def __init__(self, message, achieved_digits):
        super().__init__(message)
        self.achieved_digits = achieved_digits


class NeedMoreLevelsError(NHQuarticError):
    pass


class InvalidBracketError(NHQuarticError):
    pass
