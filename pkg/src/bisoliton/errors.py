"""Exception hierarchy shared by all modules."""


class BisolitonError(Exception):
    """Base class for every error raised by this package."""

    hint = ""


# expressions

class ExprSyntaxError(BisolitonError, ValueError):
    """Malformed expression text.

    ``offset`` is the byte offset (UTF-8) where parsing stopped and
    ``expected`` the set of token kinds that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{message} at offset {offset}" + (f" (expected one of: {exp})" if exp else ""))


class UnknownIdentifier(BisolitonError, ValueError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class DomainError(BisolitonError, ArithmeticError):
    """Evaluation left the real domain of a subexpression."""

    def __init__(self, message, subexpr=None):
        self.subexpr = subexpr
        where = f" in {subexpr}" if subexpr is not None else ""
        super().__init__(message + where)


# quadrature

class QuadratureNonConvergence(BisolitonError, RuntimeError):
    def __init__(self, a, b, estimate, error, subdivisions):
        self.a, self.b = a, b
        self.estimate, self.error = estimate, error
        self.subdivisions = subdivisions
        super().__init__(
            f"quadrature on [{a:.17g}, {b:.17g}] did not reach tolerance after "
            f"{subdivisions} subdivisions (error estimate {error:.3g})"
        )


# surfaces

class NonRegularPoint(BisolitonError, ValueError):
    hint = "move the parameter point away from F'(r)G'(s) = 0 and r^2 s^2 = 1"


class DegenerateFirstForm(BisolitonError, ValueError):
    pass


class NormalThirdComponentZero(BisolitonError, ValueError):
    hint = "the normal field must have a nonvanishing third component on the whole interval"


class NotUnitNormal(BisolitonError, ValueError):
    hint = "normalize the normal field with respect to the relevant metric"


class ProjectionSingular(BisolitonError, ValueError):
    pass


class GraphInversionFailure(BisolitonError, RuntimeError):
    hint = "the map (r,s) -> (x,y) is not locally invertible near this point"


# Bjorling problem

class NonMonotoneParamCurve(BisolitonError, ValueError):
    hint = "r(t) and s(t) must be strictly monotone; split the strip where n1 n2' - n2 n1' = +-n3'"


class DomainViolation(BisolitonError, ValueError):
    hint = "the strip maps to parameter points with |rs| >= 1"


class ConsistencyFailure(BisolitonError, ValueError):
    hint = "check that the normal is orthogonal to the curve tangent (B3 metric)"


class IntervalOverlapsData(BisolitonError, ValueError):
    hint = "choose a bump interval disjoint from the reconstructed data interval"


class AmplitudeUnachievable(BisolitonError, ValueError):
    hint = "F' vanishes somewhere on the bump interval"


class MixedCausalCharacter(BisolitonError, ValueError):
    hint = "the curve must be everywhere spacelike or everywhere timelike in L3"


class NotOrthogonal(BisolitonError, ValueError):
    hint = "the normal must be L3-orthogonal to the curve tangent"


class ConfigError(BisolitonError, ValueError):
    """Bad CLI configuration; ``line`` and ``field`` point at the culprit when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        super().__init__((", ".join(loc) + ": " if loc else "") + message)
