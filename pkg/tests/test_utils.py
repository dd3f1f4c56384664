import cmath
import math

import pytest

from caisson.config import env_override, torus_grid
from caisson.error_codes import ErrorCode, error_code_to_severity
from caisson.exceptions import ProblemFileError, RegionInconclusive
from caisson.utils import format_pi, parse_complex, parse_float_list, parse_mod_arg


@pytest.mark.parametrize(
    ["value", "expected"],
    [
        (2, 2),
        (-1.5, -1.5),
        ({"re": 1, "im": -2}, 1 - 2j),
        ({"mod": 2, "arg_pi": 0.5}, 2j),
        ([3, 4], 3 + 4j),
        ("1,1", -1),
    ],
)
def test_parse_complex(value, expected):
    assert parse_complex(value) == pytest.approx(expected)


@pytest.mark.parametrize("value", [True, None, {"mod": "x"}, [1, 2, 3], "1;2"])
def test_parse_complex_invalid(value):
    with pytest.raises(ProblemFileError):
        parse_complex(value)


def test_parse_mod_arg():
    assert parse_mod_arg(" 2.5 , 0.8333 ") == pytest.approx(cmath.rect(2.5, 0.8333 * math.pi))
    with pytest.raises(ProblemFileError):
        parse_mod_arg("2.5")


def test_parse_float_list():
    assert parse_float_list("-4,4,-4, 4") == [-4, 4, -4, 4]
    with pytest.raises(ProblemFileError):
        parse_float_list("1,2", length=4)
    with pytest.raises(ProblemFileError):
        parse_float_list("1,a")


@pytest.mark.parametrize(
    ["value", "text"], [(0.4166, "0.42π"), (-1, "-1.00π"), (0.006, "0.01π")]
)
def test_format_pi(value, text):
    assert format_pi(value) == text


@pytest.mark.parametrize(
    ["code", "severity"],
    [
        (None, "Error"),
        ("foo", "Error"),
        (0, "Info"),
        (12, "Warning"),
        (ErrorCode.PROBLEM_FILE_INVALID.value, "Error"),
        (ErrorCode.ON_AMOEBA.value, "Error"),
        (ErrorCode.REGION_INCONCLUSIVE.value, "Warning"),
        ("4010", "Warning"),
    ],
)
def test_error_code_to_severity(code, severity):
    assert error_code_to_severity(code) == severity


def test_error_code_compares_with_int():
    assert ErrorCode.NOT_A_LIFT == 2010
    assert ErrorCode.NOT_A_LIFT != 2020


def test_exception_to_dict():
    error = RegionInconclusive("inside", content={"margin": -0.5})
    assert error.to_dict() == {
        "code": 4020,
        "severity": "Warning",
        "error": "RegionInconclusive",
        "message": "inside",
        "content": {"margin": -0.5},
    }
    assert str(error) == "Caisson exception: inside"


class TestConfig:
    def test_flag_wins_without_environment(self, monkeypatch):
        monkeypatch.delenv("CAISSON_THREADS", raising=False)
        assert env_override("CAISSON_THREADS", 4, 1) == 4
        assert env_override("CAISSON_THREADS", None, 1) == 1

    def test_environment_wins(self, monkeypatch):
        monkeypatch.setenv("CAISSON_THREADS", "3")
        assert env_override("CAISSON_THREADS", 4, 1) == 3

    def test_torus_grid(self):
        assert torus_grid(2) == 512
        assert torus_grid(3) == 128
