"""
Problem files: a JSON document with the basis, the support, the coefficients and named lifts.

    {
        "basis": ["1", "pi"],
        "support": [[1, 1, 1], [0, 1, ["0", "1"]]],
        "affine": false,
        "coefficients": [1, {"mod": 2.5, "arg_pi": 0.8333}, {"re": 1, "im": 0}],
        "lifts": {"B": [[1, 1, 1], [0, 1, 0], [0, 0, 1]]},
        "window": [-4, 4, -4, 4],
        "resolution": 200,
        "seed": 0,
        "parameter": 1,
        "kappas": [[0], [1], [0]],
        "lambdas": [1, 0.1, 0.01]
    }

Matrix entries are rationals ("3/2", 0.5, 2) or lists of rationals aligned with the basis.
`parameter` names the column of the free coefficient c used by `certify --c` and `threshold`.
"""

import json
import logging
import pathlib
import typing
from dataclasses import dataclass, field

from .exceptions import CaissonException, NotALift, ProblemFileError
from .expsum import DeformationFamily, ExpSum
from .membership import Window
from .scalars import RealBasis
from .support_lattice import LiftRelation, SupportMatrix, is_lift

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 200


def parse_basis(data: typing.Any) -> RealBasis:
    if data is None:
        return RealBasis.rational()
    if not isinstance(data, list):
        raise ProblemFileError("The basis must be a list of labels or {label, value} objects")
    labels, values = [], []
    for item in data:
        if isinstance(item, dict):
            try:
                labels.append(str(item["label"]))
                values.append(float(item["value"]))
            except (KeyError, TypeError, ValueError):
                raise ProblemFileError(f"Invalid basis element {item!r}")
        else:
            labels.append(str(item))
            values.append(None)
    if any(v is None for v in values):
        if any(v is not None for v in values):
            raise ProblemFileError("Either all or no basis elements carry values")
        return RealBasis.from_labels(labels)
    return RealBasis.from_labels(labels, values)


@dataclass
class ProblemFile:
    basis: RealBasis
    support: SupportMatrix
    coefficients: typing.Tuple[complex, ...]
    lifts: typing.Dict[str, LiftRelation] = field(default_factory=dict)
    window: typing.Optional[Window] = None
    resolution: int = DEFAULT_RESOLUTION
    seed: typing.Optional[int] = None
    parameter: typing.Optional[int] = None
    kappas: typing.Optional[typing.Tuple[typing.Tuple[float, ...], ...]] = None
    lambdas: typing.Tuple[float, ...] = ()

    @classmethod
    def from_dict(cls, data: typing.Dict[str, typing.Any]) -> "ProblemFile":
        if not isinstance(data, dict):
            raise ProblemFileError("A problem file must contain a JSON object")
        for key in ("support", "coefficients"):
            if key not in data:
                raise ProblemFileError(f"Missing required key '{key}'")
        basis = parse_basis(data.get("basis"))
        affine = bool(data.get("affine", False))
        support = SupportMatrix.from_json(data["support"], basis, affine=affine)
        f = ExpSum.from_json(support, data["coefficients"])

        lifts = {}
        for name, matrix in (data.get("lifts") or {}).items():
            if isinstance(matrix, dict):
                matrix = matrix.get("matrix")
            lift = SupportMatrix.from_json(matrix, basis, affine=affine)
            if not is_lift(lift, support):
                raise NotALift(f"Lift '{name}' does not contain the rows of the support")
            lifts[name] = LiftRelation.from_pair(support, lift)

        window = data.get("window")
        try:
            window = Window(*[float(e) for e in window]) if window is not None else None
            resolution = int(data.get("resolution", DEFAULT_RESOLUTION))
            seed = int(data["seed"]) if data.get("seed") is not None else None
            parameter = data.get("parameter")
            parameter = int(parameter) if parameter is not None else None
            kappas = data.get("kappas")
            kappas = tuple(tuple(float(e) for e in k) for k in kappas) if kappas else None
            lambdas = tuple(float(e) for e in data.get("lambdas", ()))
        except (TypeError, ValueError) as e:
            raise ProblemFileError(f"Invalid problem parameters: {e}")

        return cls(
            basis=basis,
            support=support,
            coefficients=f.coefficients,
            lifts=lifts,
            window=window,
            resolution=resolution,
            seed=seed,
            parameter=parameter,
            kappas=kappas,
            lambdas=lambdas,
        )

    @classmethod
    def load(cls, path: typing.Union[str, pathlib.Path]) -> "ProblemFile":
        path = pathlib.Path(path)
        try:
            with path.open() as fd:
                data = json.load(fd)
        except (OSError, json.JSONDecodeError) as e:
            raise ProblemFileError(f"Unable to read problem file {path}: {e}")
        try:
            problem = cls.from_dict(data)
        except CaissonException as e:
            logger.debug("Problem file %s rejected: %s", path, e)
            raise
        logger.debug("Loaded %s with %d lifts", path, len(problem.lifts))
        return problem

    @property
    def expsum(self) -> ExpSum:
        return ExpSum(self.support, self.coefficients)

    def lift(self, name: typing.Optional[str] = None) -> LiftRelation:
        """The named lift, or the only one when the name is omitted"""
        if name is None:
            if len(self.lifts) != 1:
                raise ProblemFileError(
                    f"Choose one of the lifts {sorted(self.lifts)}" if self.lifts
                    else "The problem file declares no lifts"
                )
            return next(iter(self.lifts.values()))
        try:
            return self.lifts[name]
        except KeyError:
            raise ProblemFileError(f"Unknown lift '{name}', available: {sorted(self.lifts)}")

    def family(self) -> DeformationFamily:
        if self.kappas is None:
            raise ProblemFileError("The problem file declares no kappas")
        return DeformationFamily(self.expsum, self.kappas)

    def resolve_lift(self, value: typing.Optional[str]) -> LiftRelation:
        """A lift named in the problem file or a JSON file holding the lift matrix"""
        if value is None or value in self.lifts:
            return self.lift(value)
        path = pathlib.Path(value)
        if not path.is_file():
            raise ProblemFileError(f"'{value}' is neither a declared lift nor a file")
        try:
            with path.open() as fd:
                matrix = json.load(fd)
        except (OSError, json.JSONDecodeError) as e:
            raise ProblemFileError(f"Unable to read lift file {path}: {e}")
        if isinstance(matrix, dict):
            matrix = matrix.get("matrix")
        lift = SupportMatrix.from_json(matrix, self.basis, affine=self.support.affine)
        if not is_lift(lift, self.support):
            raise NotALift(f"{path} does not contain the rows of the support")
        return LiftRelation.from_pair(self.support, lift)
