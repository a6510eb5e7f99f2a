class DomainError(ValueError):
    """Parameter outside the admissible tau interval."""


class NotExpandingError(ValueError):
    """A family fails the uniform-expansion certificate."""


class ConsistencyError(RuntimeError):
    """An internal count or identity check failed."""


class ConvergenceError(RuntimeError):
    """An iteration did not converge within its cap."""


class ZeroNotBracketedError(RuntimeError):
    pass


class DegenerateZeroError(ArithmeticError):
    """d_z vanishes (numerically) at the evaluation point."""


class InputError(ValueError):
    pass
