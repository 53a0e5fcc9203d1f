"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front-end:
2 hypothesis unmet, 3 budget or cap exhausted, 4 parse failure,
5 unsupported field size. Anything else maps to 1.
"""
from __future__ import annotations


class ArtifactError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.result = details.pop("result", None)
        self.details = details

    def to_json(self) -> dict:
        out = {"error": type(self).__name__, "message": str(self)}
        if self.details:
            out["details"] = self.details
        return out


# arithmetic and shape problems
class DivisionByZero(ArtifactError, ZeroDivisionError):
    pass


class FieldMismatch(ArtifactError, ValueError):
    pass


class DimensionMismatch(ArtifactError, ValueError):
    pass


class NotNilpotent(ArtifactError, ValueError):
    pass


class ZeroData(ArtifactError, ValueError):
    pass


class NonSingularVector(ArtifactError, ValueError):
    pass


class NotSingular(ArtifactError, ValueError):
    pass


class ClosureLeavesGroup(ArtifactError, ValueError):
    pass


class QNotSquare(ArtifactError, ValueError):
    pass


class NotTwoWayCycle(ArtifactError, ValueError):
    pass


class NotTwoWayEdge(ArtifactError, ValueError):
    pass


class NotInGroup(ArtifactError, ValueError):
    pass


class UnreachableTrace(ArtifactError, ValueError):
    pass


class WrongFamily(ArtifactError, ValueError):
    exit_code = 2


# hypothesis failures of the synthesis stages
class HypothesisUnmet(ArtifactError):
    exit_code = 2


class NoTransvectionInX(HypothesisUnmet):
    pass


class ExceptionalField(HypothesisUnmet):
    pass


class CaseAnalysisExhausted(HypothesisUnmet):
    pass


# resource limits
class BudgetExceeded(ArtifactError):
    exit_code = 3


class CapExceeded(BudgetExceeded):
    pass


class TooManyVertices(BudgetExceeded):
    pass


class TooLarge(BudgetExceeded):
    pass


class ParseError(ArtifactError, ValueError):
    exit_code = 4


class UnsupportedQ(ArtifactError):
    exit_code = 5
