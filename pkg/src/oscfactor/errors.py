class OscFactorError(Exception):
    """Base class for library errors."""


class InadmissibleParameters(OscFactorError, ValueError):
    """Parameters for which the factorization coefficients are singular somewhere on the line."""


class SingularityError(OscFactorError, ValueError):
    """Evaluation requested at or next to a coefficient singularity."""


class NonConvergenceError(OscFactorError, ArithmeticError):
    """A quadrature or refinement loop did not reach its tolerance."""


class DerivativeOrderError(OscFactorError, ValueError):
    """A function was asked for a derivative order it does not carry."""
