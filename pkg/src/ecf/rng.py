"""Counter-based random streams keyed by (seed, stream index).

Philox draws depend only on the key and counter, never on call order, so
replicate ``r`` of an experiment sees the same numbers whether the run is
serial or split across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

_UINT64_SPAN = 1 << 64


def _check_uint64(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if not 0 <= value < _UINT64_SPAN:
        raise DomainError(f"{name} must fit in an unsigned 64-bit word, got {value}")
    return value


def substream(seed: int, index: int) -> np.random.Philox:
    """Independent Philox stream for replicate ``index`` under ``seed``."""
    seed = _check_uint64(seed, "seed")
    index = _check_uint64(index, "index")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Philox(key=key)


def uniforms_open(stream: np.random.Philox, n: int) -> np.ndarray:
    """``n`` uniforms on the open interval (0, 1).

    Each 64-bit word is cut to its top 52 bits ``j`` and mapped to
    ``(2 j + 1) / 2**53``, the midpoint lattice that can produce neither
    endpoint, so quantile transforms stay finite.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    raw = stream.random_raw(n)
    j = (raw >> np.uint64(12)).astype(np.float64)
    return (2.0 * j + 1.0) * 2.0**-53
