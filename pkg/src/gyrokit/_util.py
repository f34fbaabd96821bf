"""Small shared internals."""

import numpy as np


def frozen_array(a, dtype) -> np.ndarray:
    """Own the buffer and lock it: value types promise immutability to callers."""
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out
