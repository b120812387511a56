"""
Core Utility Functions

This module provides common helpers: JSON conversion of numpy and datetime
values, float formatting for CSV, and small validators.
"""

import datetime
import math
from typing import Any, Iterable, List

import numpy as np


def to_jsonable(data: Any) -> Any:
    """
    Convert a result structure into plain JSON types.

    Recursively processes dictionaries, lists and tuples, turning numpy arrays
    and scalars into lists and Python numbers, datetimes into strings and
    non-finite floats into their string names.

    Args:
        data: Dictionary, list, or other value that may contain numpy values

    Returns:
        The same data structure with JSON-compatible leaves
    """
    if isinstance(data, dict):
        return {str(key): to_jsonable(value) for key, value in data.items()}
    elif isinstance(data, (list, tuple)):
        return [to_jsonable(item) for item in data]
    elif isinstance(data, np.ndarray):
        return to_jsonable(data.tolist())
    elif isinstance(data, np.integer):
        return int(data)
    elif isinstance(data, (float, np.floating)):
        value = float(data)
        if math.isfinite(value):
            return value
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    elif isinstance(data, np.bool_):
        return bool(data)
    elif isinstance(data, datetime.datetime):
        return data.strftime("%Y-%m-%d %H:%M:%S")
    elif isinstance(data, datetime.date):
        return data.strftime("%Y-%m-%d")
    elif hasattr(data, "to_dict"):
        return to_jsonable(data.to_dict())
    else:
        return data


def format_float(value: Any) -> str:
    """
    Format a number for CSV output with round-trip precision.

    Args:
        value: float, int, None or string

    Returns:
        str: '%.17g' for floats, str() for ints, '' for None
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def parse_float_list(text: str) -> List[float]:
    """
    Parse a comma separated list of decimals.

    Example:
        >>> parse_float_list("0.1, 0.2,0.4")
        [0.1, 0.2, 0.4]
    """
    return [float(item) for item in text.split(",") if item.strip()]


def parse_int_list(text: str) -> List[int]:
    """
    Parse a comma separated list of integers, accepting '1e6' style entries.

    Example:
        >>> parse_int_list("1,4")
        [1, 4]
    """
    return [int(float(item)) for item in text.split(",") if item.strip()]


def is_probability_vector(p: Iterable[float], tol: float = 1e-12) -> bool:
    """True when p is non-negative and sums to one within tol."""
    arr = np.asarray(list(p), dtype=float)
    return bool(arr.ndim == 1 and np.all(arr >= 0) and abs(arr.sum() - 1.0) <= tol)
