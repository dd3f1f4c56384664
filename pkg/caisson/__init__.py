from .expsum import ExpSum
from .scalars import ExtScalar, RealBasis
from .support_lattice import LiftRelation, SupportMatrix

__all__ = ["ExpSum", "ExtScalar", "LiftRelation", "RealBasis", "SupportMatrix"]
