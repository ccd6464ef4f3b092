"""Exception hierarchy shared across ratelens."""


class RatelensError(Exception):
    """Base class for all ratelens errors."""


class ShapeMismatch(RatelensError, ValueError):
    pass


class NotNormalized(RatelensError, ValueError):
    pass


class ZeroRowMass(RatelensError, ValueError):
    """A row of a joint distribution carries no mass; smooth the counts first."""


class NonNumericAlphabet(RatelensError, TypeError):
    pass


class ZeroProbability(RatelensError, ValueError):
    """A zero conditional or marginal probability would make the distortion infinite."""


class TargetOutOfRange(RatelensError, ValueError):
    pass


class NotSquare(RatelensError, ValueError):
    pass


class InvalidParameter(RatelensError, ValueError):
    pass


class NotConverged(RatelensError, RuntimeWarning):
    """Raised (strict mode) or warned when the solver hits its iteration cap."""
