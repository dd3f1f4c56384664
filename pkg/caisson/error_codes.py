import typing
from enum import Enum


class ErrorCode(Enum):
    PROBLEM_FILE_INVALID = 1000
    BASIS_MISMATCH = 1010
    SHAPE_MISMATCH = 1020
    SUPPORT_MISMATCH = 1030
    WINDOW_MISMATCH = 1040
    INVALID_GRID = 1050
    NOT_PSEUDO_HOMOGENEOUS = 2000
    NOT_A_LIFT = 2010
    NOT_REPRESENTABLE = 2020
    ROOT_FINDING_FAILED = 3000
    ON_AMOEBA = 3010
    ON_AMOEBA_OR_ILL_CONDITIONED = 3020
    NOT_A_CIRCUIT_LIFT = 4000
    EQUILIBRIUM_OFF_SUBSPACE = 4010
    REGION_INCONCLUSIVE = 4020

    def __eq__(self, o):
        if isinstance(o, int):
            return self.value == o
        else:
            return super().__eq__(o)

    def __hash__(self):
        return hash(self.value)


def error_code_to_severity(error_code: typing.Union[None, int, str]) -> str:
    if error_code is None:
        return "Error"
    try:
        error_code = int(error_code)
    except (ValueError, TypeError):
        return "Error"

    if error_code == 0:
        return "Info"
    elif 1 <= error_code < 1000:
        return "Warning"
    elif 1000 <= error_code < 4000:
        return "Error"
    elif 4000 <= error_code < 5000:
        # the certificate did not fire, the input itself was fine
        return "Warning"
    else:
        return "Error"
