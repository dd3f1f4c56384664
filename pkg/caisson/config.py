"""
Runtime settings, read from the environment (or a .env / settings.ini file) through decouple
"""

import typing

from decouple import config

THREADS: int = config("CAISSON_THREADS", cast=int, default=1)
SEED: int = config("CAISSON_SEED", cast=int, default=0)

# torus grid points per axis used by the barycentric region sampler
TORUS_GRID_2: int = config("CAISSON_TORUS_GRID_2", cast=int, default=512)
TORUS_GRID_3: int = config("CAISSON_TORUS_GRID_3", cast=int, default=128)

ORDER_SAMPLES: int = config("CAISSON_ORDER_SAMPLES", cast=int, default=32)
RONKIN_SAMPLES: int = config("CAISSON_RONKIN_SAMPLES", cast=int, default=4096)
RATIONALIZE_DENOMINATOR: int = config(
    "CAISSON_RATIONALIZE_DENOMINATOR", cast=int, default=1_000_000
)


def env_override(key: str, flag_value: typing.Optional[int], default: int) -> int:
    """
    The environment wins over CLI flags for CAISSON_THREADS and CAISSON_SEED.

    Looked up at call time so that tests may alter os.environ.
    """
    value = config(key, default="")
    if value != "":
        return int(value)
    if flag_value is not None:
        return flag_value
    return default


def torus_grid(n: int) -> int:
    return TORUS_GRID_2 if n <= 2 else TORUS_GRID_3
