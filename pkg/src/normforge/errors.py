"""Exception hierarchy.

Validation problems (bad numbers, malformed strategies, unknown names) derive
from ``ValidationError``; requests the library refuses to carry out (search too
large, unsupported scheme, violated analytic hypothesis) derive from
``UnsupportedRequest``. The CLI maps the two families to exit codes 2 and 3.
"""


class NormForgeError(Exception):
    pass


class ValidationError(NormForgeError, ValueError):
    pass


class UnsupportedRequest(NormForgeError):
    pass


class OutOfRange(ValidationError):
    def __init__(self, field, bound, value=None):
        self.field = field
        self.bound = bound
        self.value = value
        msg = f"{field} out of range: requires {bound}"
        if value is not None:
            msg += f", got {value!r}"
        super().__init__(msg)


class BenefitNotAboveCost(ValidationError):
    def __init__(self, b, c):
        self.b = b
        self.c = c
        super().__init__(f"service benefit must exceed cost: b={b!r}, c={c!r}")


class DimensionMismatch(ValidationError):
    pass


class UnknownFigure(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class LTooLarge(UnsupportedRequest):
    def __init__(self, L, limit):
        self.L = L
        self.limit = limit
        super().__init__(f"L={L} exceeds the exhaustive-search limit L <= {limit}")


class UnsupportedScheme(UnsupportedRequest):
    pass


class HypothesisViolated(UnsupportedRequest):
    pass


class MissingWhitewashCost(UnsupportedRequest):
    pass


class NoConvergence(UnsupportedRequest):
    pass


class SingularSystem(UnsupportedRequest):
    pass


class HorizonTooShort(UnsupportedRequest):
    pass
