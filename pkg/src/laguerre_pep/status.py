from __future__ import annotations

import enum


class StopStatus(enum.IntEnum):
    """Which stopping rule ended the iteration for an eigenvalue."""

    CRITERION1 = 1  # smallest pivot of R below tau
    CRITERION2 = 2  # backward-error upper bound below eps
    CRITERION3 = 3  # Laguerre step smaller than eps * |lam|
    MAX_ITER = 4

    @property
    def label(self) -> str:
        return {1: "criterion1", 2: "criterion2", 3: "criterion3", 4: "max_iter"}[self.value]


class Kind(str, enum.Enum):
    ZERO = "zero"
    FINITE = "finite"
    INFINITE = "infinite"
