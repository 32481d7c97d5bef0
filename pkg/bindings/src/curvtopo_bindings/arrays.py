"""Array admission at the binding boundary.

The engine assumes well-formed numpy inputs; callers of a binding layer
cannot be assumed to provide them.  ``BoundArray`` is the admission gate:
it accepts anything array-like, checks rank, numeric dtype, and finiteness,
and holds a C-contiguous view that shares the caller's buffer whenever the
input already is one.  Value-level checks (binary masks, probability
ranges) stay with the engine so its error messages reach the caller
unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class BoundArrayError(ValueError):
    """Input rejected at the binding boundary before reaching the engine."""


@dataclass(frozen=True)
class BoundArray:
    """A contiguous numeric buffer view plus its shape metadata."""

    data: np.ndarray
    shape: tuple[int, ...]

    @classmethod
    def wrap(
        cls, array, ranks: tuple[int, ...] = (2,), name: str = "array"
    ) -> "BoundArray":
        """Admit ``array`` with one of the given ranks, copying only if needed.

        A C-contiguous ndarray input is wrapped zero-copy; anything else
        (nested lists, strided views, transposes) is materialized once.
        """
        try:
            arr = np.asarray(array)
        except Exception as exc:
            raise BoundArrayError(f"{name} is not array-like: {exc}") from exc
        if arr.dtype.kind not in "buif":
            raise BoundArrayError(f"{name} must be numeric, got dtype {arr.dtype}")
        if arr.ndim not in ranks:
            expected = " or ".join(f"{r}-D" for r in ranks)
            raise BoundArrayError(
                f"{name} must be {expected}, got {arr.ndim}-D shape {arr.shape}"
            )
        # bool and integer dtypes cannot hold non-finite values
        if arr.dtype.kind == "f" and arr.size and not np.isfinite(arr).all():
            raise BoundArrayError(f"{name} contains non-finite values")
        data = np.ascontiguousarray(arr)
        bound = cls(data=data, shape=tuple(data.shape))
        bound.validate()
        return bound

    def validate(self) -> None:
        if not self.data.flags.c_contiguous:
            raise BoundArrayError("buffer view must be C-contiguous")
        if self.data.shape != self.shape or self.data.size != math.prod(self.shape):
            raise BoundArrayError(
                f"shape metadata {self.shape} inconsistent with a buffer of "
                f"{self.data.size} elements"
            )
