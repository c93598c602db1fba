"""Operator algebra of N, L and N x L on the unit sphere, with a matrix oracle."""

__version__ = "0.1.0"

from .opalg import (  # noqa: E402
    Generator,
    Monomial,
    OperatorExpr,
    adjoint,
    coefficient_of,
    commutator,
    degree_N,
    normal_form,
    substitute_params,
)
from .params import GaussQ, ParamPoly  # noqa: E402
