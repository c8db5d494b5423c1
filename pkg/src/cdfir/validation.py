"""Input validation helpers shared by the functional API and the estimators.

``sklearn.utils.check_array`` rejects complex input, so complex baseband
streams are validated here instead.
"""
from __future__ import annotations

import math

import numpy as np

from .exceptions import NumericalError, ParameterError


def check_stream(x, *, min_length: int = 1, name: str = "X") -> np.ndarray:
    """Return ``x`` as a finite 1-D complex128 array.

    A column vector ``(n, 1)`` is accepted and flattened, so streams can
    pass through tools that insist on 2-D input.
    """
    arr = np.asarray(x)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be a 1-D sequence, got shape {arr.shape}")
    if not (np.issubdtype(arr.dtype, np.number) or arr.dtype == bool):
        raise ParameterError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = arr.astype(np.complex128, copy=False)
    if arr.size < min_length:
        raise ParameterError(f"{name} needs at least {min_length} samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite values")
    return arr


def check_odd(n: int, name: str = "N") -> int:
    if int(n) != n or n < 1 or n % 2 == 0:
        raise ParameterError(f"{name} must be an odd positive integer, got {n}")
    return int(n)


def check_in_interval(value: float, low: float, high: float, name: str,
                      *, closed_low: bool = False, closed_high: bool = True) -> float:
    """Check ``value`` lies in an interval, open/closed per the flags."""
    value = float(value)
    ok_low = value >= low if closed_low else value > low
    ok_high = value <= high if closed_high else value < high
    if not (math.isfinite(value) and ok_low and ok_high):
        lb = "[" if closed_low else "("
        rb = "]" if closed_high else ")"
        raise ParameterError(f"{name} must lie in {lb}{low}, {high}{rb}, got {value}")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be positive and finite, got {value}")
    return value


def freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr
