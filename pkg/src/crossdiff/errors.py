"""Exception types shared across the package."""


class CrossDiffError(Exception):
    """Base class for domain errors raised by this package."""


class InvalidArgument(CrossDiffError, ValueError):
    """A precondition on the inputs was violated."""


class PoleError(CrossDiffError, ArithmeticError):
    """A residual was evaluated at a pole of a cotangent/cosecant term."""


class NotFound(CrossDiffError):
    """A root-finding or bracketing search found no admissible solution."""


class StepRejected(CrossDiffError):
    """A time step produced a negative cell average (CFL violation).

    Attributes
    ----------
    species : str
        ``"rho"`` or ``"eta"``.
    cell : int
        Index of the most negative cell.
    value : float
        The offending cell value.
    """

    def __init__(self, species, cell, value):
        self.species = species
        self.cell = cell
        self.value = value
        super().__init__(f"step rejected: {species}[{cell}] = {value:.3e} < 0")


class ConfigError(CrossDiffError):
    """Configuration text failed to parse or validate.

    ``problems`` holds ``(line_number, message)`` pairs; line 0 means the
    problem is not tied to a particular line.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        text = "; ".join(f"line {ln}: {msg}" if ln else msg for ln, msg in self.problems)
        super().__init__(text)
