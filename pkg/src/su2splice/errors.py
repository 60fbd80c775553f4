"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` so the CLI can emit a
JSON envelope without string matching.
"""


class Su2SpliceError(Exception):
    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class NonCommutingPair(Su2SpliceError):
    code = "non_commuting_pair"


class TangencyUnresolved(Su2SpliceError):
    code = "tangency_unresolved"


class PointOnCurve(Su2SpliceError):
    code = "point_on_curve"


class LiftObstructed(Su2SpliceError):
    code = "lift_obstructed"


class NotNormalizable(Su2SpliceError):
    code = "not_normalizable"


class WrongDeterminant(Su2SpliceError):
    code = "wrong_determinant"


class NoFreeQuotient(Su2SpliceError):
    code = "no_free_quotient"


class MissingPolynomial(Su2SpliceError):
    code = "missing_polynomial"


class ContinuationStalled(Su2SpliceError):
    code = "continuation_stalled"

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SelectionFailed(Su2SpliceError):
    code = "selection_failed"


class InvalidTarget(Su2SpliceError):
    code = "invalid_target"


class NoIntersection(Su2SpliceError):
    code = "no_intersection"


class MatchingFailed(Su2SpliceError):
    code = "matching_failed"


class InvalidParameters(Su2SpliceError):
    code = "invalid_parameters"


class ValidationFailed(Su2SpliceError):
    code = "validation_failed"

    def __init__(self, message, clause=None):
        super().__init__(message)
        self.clause = clause

    def to_dict(self):
        d = super().to_dict()
        d["clause"] = self.clause
        return d


class InvalidGroup(Su2SpliceError):
    code = "invalid_group"
