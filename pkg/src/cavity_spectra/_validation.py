"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""
import numbers

import numpy as np

from .exceptions import InvalidArgumentError


def check_extent(extent):
    """Return the three box lengths as a float tuple, rejecting non-positive ones."""
    arr = np.asarray(extent, dtype=float)
    if arr.shape != (3,):
        raise InvalidArgumentError(f"extent must have 3 entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise InvalidArgumentError(f"extent entries must be finite and > 0, got {tuple(arr)}")
    return tuple(float(a) for a in arr)


def check_subdivisions(subdivisions):
    if isinstance(subdivisions, numbers.Integral):
        subdivisions = (subdivisions,) * 3
    subdivisions = tuple(subdivisions)
    if len(subdivisions) != 3:
        raise InvalidArgumentError("subdivisions must have 3 entries")
    out = []
    for n in subdivisions:
        if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 1:
            raise InvalidArgumentError(f"subdivisions must be integers >= 1, got {subdivisions}")
        out.append(int(n))
    return tuple(out)


def check_positive(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidArgumentError(f"{name} must be a real number, got {value!r}")
    if not np.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be finite and > 0, got {value!r}")
    return float(value)


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise InvalidArgumentError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_points(x):
    """Coerce ``x`` to a float array whose last axis has length 3."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != 3:
        raise InvalidArgumentError(f"points must have trailing dimension 3, got shape {x.shape}")
    return x
