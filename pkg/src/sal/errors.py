"""Exception hierarchy shared by the symbolic and numerical modules."""


class SalError(Exception):
    """Base class for domain errors raised by the toolkit."""


class OrderOverflowError(SalError):
    """A derivative would exceed the configured maximum jet order."""


class DegenerateMatchError(SalError):
    """Tried to match an expression against the zero expression."""


class NotIntegrableError(SalError):
    """An antiderivative in u lies outside the power-law/log algebra."""


class NotASymmetryError(SalError):
    def __init__(self, conditions):
        self.conditions = list(conditions)
        super().__init__(f"generator is not a symmetry; {len(self.conditions)} residual condition(s)")


class NonConservationError(SalError):
    """The divergence of a vector is not a multiple of the equation."""


class UnsupportedSpecError(SalError):
    pass


class SpecError(SalError):
    """Invalid, incomplete or inconsistent equation specification."""


class ParseError(SalError):
    def __init__(self, message, span, text=""):
        self.span = span
        self.text = text
        super().__init__(f"{message} at {span}")


class SolverError(SalError):
    pass


class BlowUpError(SolverError):
    def __init__(self, message, last_t):
        self.last_t = last_t
        super().__init__(f"{message} (last valid t = {last_t:.17g})")


class BreakingError(SolverError):
    def __init__(self, t, t_star):
        self.t_star = t_star
        super().__init__(f"t = {t} is past the breaking time t* = {t_star:.17g}")
