import typing
from dataclasses import dataclass, field

from .scalars import ExtScalar

CERTIFIED = "Certified"

STAGES = ("transport", "circuit_detection", "equilibrium", "subspace_check", "region_probe")


@dataclass
class StageResult:
    name: str
    passed: bool
    seconds: float = 0.0
    detail: typing.Dict[str, typing.Any] = field(default_factory=dict)

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "stage": self.name,
            "passed": self.passed,
            "seconds": round(self.seconds, 6),
            **self.detail,
        }


@dataclass
class CertificateReport:
    """
    Stage by stage outcome of the barycentric circuit certificate.

    `verdict` is either "Certified" or the name of the error raised by the first failing stage.
    """

    stages: typing.List[StageResult] = field(default_factory=list)
    verdict: typing.Optional[str] = None
    order: typing.Optional[typing.Tuple[ExtScalar, ...]] = None
    margins: typing.Dict[str, float] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    @property
    def failed_stage(self) -> typing.Optional[str]:
        for stage in self.stages:
            if not stage.passed:
                return stage.name
        return None

    def add(self, stage: StageResult) -> StageResult:
        self.stages.append(stage)
        return stage

    def as_dict(self, with_timings: bool = True) -> typing.Dict[str, typing.Any]:
        """Timings vary between runs, reports meant to be compared are written without them"""
        stages = [stage.as_dict() for stage in self.stages]
        if not with_timings:
            for stage in stages:
                stage.pop("seconds")
        return {
            "verdict": self.verdict,
            "order": [e.to_json() for e in self.order] if self.order is not None else None,
            "order_approximation": (
                [e.approximate() for e in self.order] if self.order is not None else None
            ),
            "margins": self.margins,
            "stages": stages,
        }
