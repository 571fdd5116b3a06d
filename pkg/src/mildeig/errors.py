"""Exception hierarchy shared by all modules."""


class MildEigError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(MildEigError, ValueError):
    pass


class NegativeTime(MildEigError, ValueError):
    pass


class ConeViolation(MildEigError):
    """A value left the positive cone by more than the violation tolerance."""

    def __init__(self, violation, where=""):
        self.violation = float(violation)
        msg = f"cone violation of {self.violation:.3e}"
        if where:
            msg += f" in {where}"
        super().__init__(msg)


class DomainExceeded(MildEigError, ValueError):
    pass


class QuadratureMismatch(MildEigError):
    pass


class NoMass(MildEigError):
    """The solution operator collapsed to (numerically) zero on an iterate."""


class ConfigError(MildEigError):
    pass


class SchemaError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass


class ExpressionError(MildEigError, ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnknownVariable(ExpressionError):
    pass


class UnknownFunction(ExpressionError):
    pass


class EvaluationError(ExpressionError):
    pass
