"""Numerical toolkit for multi-norms on Hilbert C*-modules over finite-dimensional algebras."""

from .algebra import (
    AlgebraElement,
    AlgebraShape,
    PureState,
    alg_norm,
    enumerate_characters,
    pure_state_sampler,
)
from .module import (
    ModuleSpace,
    ModuleTuple,
    ModuleVector,
    OperatorOnModule,
    OrthoTuple,
    inner,
    op_norm,
    sample_aco,
    sample_D_n,
    theta,
    vec_norm,
)
from .norms import (
    NormEstimate,
    hilbert_multinorm,
    min_multinorm,
    mu_star,
    purestate_multinorm,
    star_multinorm,
    two_two_multinorm,
    weak_two_summing,
)
from .optimize import OptimizerConfig

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "AlgebraShape",
    "ModuleSpace",
    "ModuleTuple",
    "ModuleVector",
    "NormEstimate",
    "OperatorOnModule",
    "OptimizerConfig",
    "OrthoTuple",
    "PureState",
    "alg_norm",
    "enumerate_characters",
    "hilbert_multinorm",
    "inner",
    "min_multinorm",
    "mu_star",
    "op_norm",
    "pure_state_sampler",
    "purestate_multinorm",
    "sample_aco",
    "sample_D_n",
    "star_multinorm",
    "theta",
    "two_two_multinorm",
    "vec_norm",
    "weak_two_summing",
]
