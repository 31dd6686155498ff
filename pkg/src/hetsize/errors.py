"""Semantic exception hierarchy for hetsize.

Validation errors signal bad user input; consistency errors signal a numerical
contradiction between two computation routes that should agree, and are never
silently reconciled.
"""


class HetsizeError(Exception):
    """Base class for all hetsize errors."""


# ---------------------------------------------------------------- validation


class InvalidInput(HetsizeError):
    """Input contains NaN/Inf or is otherwise unusable."""


class DimensionMismatch(HetsizeError):
    """Shapes of X, R, or auxiliary vectors do not line up."""


class RankDeficient(HetsizeError):
    """Design matrix has numerical rank below its column count."""


class ZeroRestriction(HetsizeError):
    """Restriction vector R is identically zero."""


class TooFewObservations(HetsizeError):
    """Requires 1 <= k < n."""


class NonpositiveWeight(HetsizeError):
    """Custom weight vector contains an entry <= 0."""


class BadPartition(HetsizeError):
    """Group sizes do not form a composition of n."""


class BadSimplexPoint(HetsizeError):
    """Variance pattern is not a strictly positive point of the unit simplex."""


# ------------------------------------------------------- consistency breaches


class DecompositionFailure(HetsizeError):
    """Orthogonal-sum reconstruction of the invariance set failed tolerance."""


class EquivalenceBreach(HetsizeError):
    """Independently evaluated equivalent condition forms disagree.

    Carries the tuple of verdicts in ``forms`` so callers can report which
    routes split.
    """

    def __init__(self, message: str, forms=None):
        super().__init__(message)
        self.forms = forms


class InvarianceBreach(HetsizeError):
    """A transform that must leave the statistic unchanged did not."""


class PreconditionUnverified(HetsizeError):
    """Operation called outside the regime in which its identity is proven."""


# ----------------------------------------------------------- critical values


class NotControllable(HetsizeError):
    """No finite critical value controls size for this problem/model."""

    def __init__(self, message: str, reason: str = "condition-violated"):
        super().__init__(message)
        self.reason = reason


class BracketFailure(HetsizeError):
    """Upper bracket search exceeded the overflow guard."""


# ------------------------------------------------------------------------ io


class ParseError(HetsizeError):
    """CSV ingestion failed; carries 1-based row/column location when known."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class RaggedRows(ParseError):
    """CSV rows have inconsistent lengths."""
