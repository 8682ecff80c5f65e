"""Exception hierarchy shared by every module.

The CLI maps these onto its exit codes, so new errors should subclass the
closest existing category rather than ``LoewnerQCError`` directly.
"""


class LoewnerQCError(Exception):
    """Base class for all library errors."""


class ArgumentError(LoewnerQCError, ValueError):
    """Caller passed something outside an operation's contract."""


class DomainError(ArgumentError):
    """A point or disk lies outside the declared domain."""


class EvaluationError(LoewnerQCError):
    """A user function returned non-finite values."""


class SingularityError(EvaluationError):
    """log/sqrt/non-integer power evaluated exactly at zero."""


class UnboundParameterError(ArgumentError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class SingularDerivativeError(EvaluationError):
    """f'(z) vanishes (relative to the local scale)."""


class NoLimitError(LoewnerQCError):
    """Extrapolated sequence shows no Cauchy behaviour."""


class SolverError(LoewnerQCError):
    """ODE integration failed."""


class IntegrationError(SolverError):
    """Trajectory left the half-plane or became non-finite."""


class StiffnessError(SolverError):
    """Step size underflow."""


class HypothesisError(LoewnerQCError):
    """A construction's hypothesis is violated on the samples."""


class PoleError(HypothesisError):
    """A constructed map hits a pole at a sample point."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class StencilError(ArgumentError):
    """Finite-difference stencil straddles a seam or leaves the rectangle."""


class DegenerateError(EvaluationError):
    """Jacobian-type denominator vanished."""


class ConsistencyError(LoewnerQCError):
    """An internal consistency residual exceeded its tolerance."""


class DSLSyntaxError(ArgumentError):
    """Malformed expression text.

    Carries the 0-based byte offset, 1-based line/column and the set of
    tokens the parser would have accepted.
    """

    def __init__(self, message, text, offset, expected=()):
        self.text = text
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        before = text[:offset]
        self.line = before.count("\n") + 1
        self.column = offset - (before.rfind("\n") + 1) + 1
        exp = f"; expected one of {', '.join(self.expected)}" if self.expected else ""
        super().__init__(
            f"{message} at line {self.line}, column {self.column} (offset {offset}){exp}"
        )
