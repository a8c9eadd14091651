from __future__ import annotations

from dataclasses import dataclass

from .sax import ParameterError

DEFAULT_COEFFICIENT = 0.02


@dataclass(frozen=True)
class Threshold:
    """Motif distance threshold R(L) = coefficient * L."""

    coefficient: float = DEFAULT_COEFFICIENT

    def __post_init__(self):
        if not 0.0 < self.coefficient < 1.0:
            raise ParameterError(f"threshold coefficient must be in (0, 1), got {self.coefficient}")

    def __call__(self, length: int) -> float:
        if length <= 0:
            raise ParameterError(f"threshold needs a positive length, got {length}")
        return self.coefficient * length


def threshold_fn(length: int, coefficient: float = DEFAULT_COEFFICIENT) -> float:
    return Threshold(coefficient)(length)
