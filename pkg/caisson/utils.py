import cmath
import math
import re
import typing
from typing import List, Optional

from .exceptions import ProblemFileError

mod_arg_matcher = re.compile(r"^\s*(?P<mod>[^,]+?)\s*,\s*(?P<arg>[^,]+?)\s*$")


def parse_complex(value: typing.Any) -> complex:
    """
    Accepts {"re": .., "im": ..}, {"mod": .., "arg_pi": ..} (argument in units of π),
    a "mod,arg_pi" string or a plain number.
    """
    if isinstance(value, dict):
        if "mod" in value or "arg_pi" in value:
            try:
                return cmath.rect(float(value["mod"]), math.pi * float(value.get("arg_pi", 0)))
            except (KeyError, TypeError, ValueError):
                raise ProblemFileError(f"Invalid polar coefficient {value!r}")
        try:
            return complex(float(value.get("re", 0)), float(value.get("im", 0)))
        except (TypeError, ValueError):
            raise ProblemFileError(f"Invalid coefficient {value!r}")
    if isinstance(value, str):
        return parse_mod_arg(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return complex(value)
    raise ProblemFileError(f"Invalid coefficient {value!r}")


def parse_mod_arg(text: str) -> complex:
    """
    "2.5,0.8333" -> 2.5 * exp(0.8333 π i)
    """
    m = mod_arg_matcher.match(text)
    if not m:
        raise ProblemFileError(f"Expected 'mod,arg_pi', got {text!r}")
    try:
        return cmath.rect(float(m.group("mod")), math.pi * float(m.group("arg")))
    except ValueError:
        raise ProblemFileError(f"Expected 'mod,arg_pi', got {text!r}")


def parse_float_list(text: str, length: Optional[int] = None) -> List[float]:
    """
    Comma separated floats, e.g. a window "x0,x1,y0,y1" or a point "x,y"
    """
    try:
        values = [float(e) for e in text.split(",") if e.strip()]
    except ValueError:
        raise ProblemFileError(f"Expected comma separated numbers, got {text!r}")
    if length is not None and len(values) != length:
        raise ProblemFileError(f"Expected {length} comma separated numbers, got {text!r}")
    return values


def format_pi(value: float, digits: int = 2) -> str:
    """Renders a multiple of π the way intervals are reported, e.g. '0.42π'"""
    return f"{round(value, digits):.{digits}f}π"
