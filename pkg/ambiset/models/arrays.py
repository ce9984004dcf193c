"""Annotated numpy array types usable as pydantic fields."""

from typing import Annotated, Any

import numpy as np
import numpy.typing as npt
from pydantic import PlainSerializer, PlainValidator

FloatVector = npt.NDArray[np.float64]


def as_frozen_array(value: Any) -> FloatVector:
    """Coerce ``value`` to a read-only float64 array (always a private copy)."""
    try:
        array = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"expected a numeric array, got {type(value).__name__}") from exc
    array.setflags(write=False)
    return array


def _to_nested_list(array: FloatVector) -> list[Any]:
    result: list[Any] = array.tolist()
    return result


FloatArray = Annotated[
    FloatVector,
    PlainValidator(as_frozen_array),
    PlainSerializer(_to_nested_list, return_type=list),
]
