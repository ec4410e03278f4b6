"""Localization of a module at a pure state.

For ``tau = (j, xi)`` the null space ``N_tau`` consists of the vectors whose
block-``j`` stack kills ``xi``, and the quotient map is ``x -> X_j xi``.  On a
free module this map is onto ``C^{p k_j}``, so ``H_tau`` needs no completion,
and an operator acts on the localization through its block-``j`` matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import PureState, ShapeMismatchError
from .module import ModuleSpace, ModuleTuple, ModuleVector, OperatorOnModule


@dataclass(frozen=True, eq=False)
class Localization:
    source: ModuleSpace
    state: PureState

    @property
    def dim(self) -> int:
        return self.source.block_dim(self.state.block)

    def quotient_map(self, x: ModuleVector) -> np.ndarray:
        if x.space != self.source:
            raise ShapeMismatchError(f"{x.space} vs {self.source}")
        return x.blocks[self.state.block] @ self.state.vector

    q = quotient_map


def localize(space: ModuleSpace, tau: PureState) -> Localization:
    if tau.shape != space.shape:
        raise ShapeMismatchError(f"state on {tau.shape}, module over {space.shape}")
    return Localization(space, tau)


def phi_tau(loc: Localization, T: OperatorOnModule) -> np.ndarray:
    """Matrix of the induced operator on ``H_tau``."""
    if T.space != loc.source:
        raise ShapeMismatchError(f"{T.space} vs {loc.source}")
    return T.blocks[loc.state.block].copy()


def localize_tuple(loc: Localization, t: ModuleTuple) -> list[np.ndarray]:
    if t.space != loc.source:
        raise ShapeMismatchError(f"{t.space} vs {loc.source}")
    return [loc.quotient_map(x) for x in t]
