import typing

from .error_codes import ErrorCode, error_code_to_severity


class CaissonException(Exception):
    code: ErrorCode = ErrorCode.PROBLEM_FILE_INVALID

    def __init__(self, text, content=None):
        self.text = text
        self.content = content

    def __str__(self):
        return "Caisson exception: {}".format(self.text)

    @property
    def severity(self) -> str:
        return error_code_to_severity(self.code.value)

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "code": self.code.value,
            "severity": self.severity,
            "error": type(self).__name__,
            "message": self.text,
            "content": self.content,
        }


class ProblemFileError(CaissonException):
    code = ErrorCode.PROBLEM_FILE_INVALID


class BasisMismatch(CaissonException):
    code = ErrorCode.BASIS_MISMATCH


class ShapeMismatch(CaissonException):
    code = ErrorCode.SHAPE_MISMATCH


class SupportMismatch(CaissonException):
    code = ErrorCode.SUPPORT_MISMATCH


class WindowMismatch(CaissonException):
    code = ErrorCode.WINDOW_MISMATCH


class InvalidGrid(CaissonException):
    code = ErrorCode.INVALID_GRID


class NotPseudoHomogeneous(CaissonException):
    code = ErrorCode.NOT_PSEUDO_HOMOGENEOUS


class NotALift(CaissonException):
    code = ErrorCode.NOT_A_LIFT


class NotRepresentable(CaissonException):
    """Exact result leaves the declared real basis (e.g. needs products of basis elements)"""

    code = ErrorCode.NOT_REPRESENTABLE


class RootFindingError(CaissonException):
    code = ErrorCode.ROOT_FINDING_FAILED


class OnAmoeba(CaissonException):
    code = ErrorCode.ON_AMOEBA


class OnAmoebaOrIllConditioned(CaissonException):
    code = ErrorCode.ON_AMOEBA_OR_ILL_CONDITIONED


class NotACircuitLift(CaissonException):
    code = ErrorCode.NOT_A_CIRCUIT_LIFT


class EquilibriumOffSubspace(CaissonException):
    code = ErrorCode.EQUILIBRIUM_OFF_SUBSPACE


class RegionInconclusive(CaissonException):
    code = ErrorCode.REGION_INCONCLUSIVE
