"""The empirical cross-over function and the two-cluster split it induces.

For a sorted sample ``W_(1) <= ... <= W_(n)`` and bucket ``k`` in
``1..n-1`` the cross-over value is

    g(k) = mean(W_(1..k)) - W_(k) + mean(W_(k+1..n)) - W_(k+1)

i.e. each cluster mean minus the boundary order statistic on its side.
``g`` starts nonnegative, ends nonpositive, and its first nonpositive
bucket ``k*`` estimates the population split level via ``p = k* / n``.

All bucket values are computed from one shared prefix-sum array in a fixed
numerator-over-denominator form, so a single bucket evaluated on its own
(:func:`ecf_eval`) is bit-for-bit equal to the same entry of the full
curve (:func:`ecf_curve`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "SortedSample",
    "EcfCurve",
    "TwoClusterSplit",
    "bucket_index",
    "ecf_eval",
    "ecf_curve",
    "empirical_split_point",
    "two_cluster_split",
]


class SortedSample:
    """An ascending data vector with cached prefix sums.

    Construction sorts the input unless ``assume_sorted`` is set (the flag
    still costs one O(n) ordering check).  Values must be finite.  Both the
    value array and the prefix-sum array are immutable afterwards.
    """

    __slots__ = ("values", "prefix")

    def __init__(self, values, assume_sorted: bool = False):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1:
            raise DomainError(f"sample must be one-dimensional, got shape {arr.shape}")
        if arr.size < 1:
            raise DomainError("sample must contain at least one observation")
        if not np.all(np.isfinite(arr)):
            raise DomainError("sample contains non-finite values")
        if assume_sorted:
            if arr.size > 1 and np.any(np.diff(arr) < 0.0):
                raise DomainError("assume_sorted was set but the data is not ascending")
            arr = arr.copy()
        else:
            arr = np.sort(arr, kind="stable")
        arr.setflags(write=False)
        prefix = np.cumsum(arr)
        prefix.setflags(write=False)
        self.values = arr
        self.prefix = prefix

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"SortedSample(n={self.n}, min={self.values[0]!r}, max={self.values[-1]!r})"


def bucket_index(n: int, p: float) -> int:
    """Bucket for level p: ceil(n * p) clamped into [1, n - 1]."""
    if n < 2:
        raise DomainError(f"need at least two observations, got n={n}")
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    k = math.ceil(n * p)
    return min(max(k, 1), n - 1)


def _bucket_value(values: np.ndarray, prefix: np.ndarray, k: int) -> float:
    n = values.size
    total = prefix[n - 1]
    lower = (prefix[k - 1] - k * values[k - 1]) / k
    upper = ((total - prefix[k - 1]) - (n - k) * values[k]) / (n - k)
    return float(lower + upper)


def ecf_eval(sample: SortedSample, p: float) -> float:
    """Cross-over value of the bucket containing level ``p``."""
    n = sample.n
    if n < 2:
        raise DomainError("the cross-over function needs at least two observations")
    k = bucket_index(n, p)
    return _bucket_value(sample.values, sample.prefix, k)


@dataclass(frozen=True)
class EcfCurve:
    """All bucket values of the empirical cross-over function.

    ``g[i]`` holds the value of bucket ``i + 1``; ``crossing_k`` is the
    first bucket with a nonpositive value and ``p_hat = crossing_k / n``.
    """

    n: int
    g: np.ndarray
    crossing_k: int
    p_hat: float

    def value(self, k: int) -> float:
        if not 1 <= k <= self.n - 1:
            raise DomainError(f"bucket must lie in [1, {self.n - 1}], got {k}")
        return float(self.g[k - 1])


def ecf_curve(sample: SortedSample) -> EcfCurve:
    """Evaluate every bucket of the cross-over function in O(n)."""
    n = sample.n
    if n < 2:
        raise DomainError("the cross-over function needs at least two observations")
    v = sample.values
    prefix = sample.prefix
    total = prefix[n - 1]
    ks = np.arange(1.0, float(n))
    lower = (prefix[:-1] - ks * v[:-1]) / ks
    upper = ((total - prefix[:-1]) - (n - ks) * v[1:]) / (n - ks)
    g = lower + upper
    g.setflags(write=False)

    nonpos = np.flatnonzero(g <= 0.0)
    if nonpos.size:
        crossing = int(nonpos[0]) + 1
    else:
        # Exact arithmetic guarantees g(n-1) <= 0; rounding dust on heavily
        # tied data can leave it a few ulp positive, in which case the
        # crossing belongs to the last bucket.
        crossing = n - 1
    return EcfCurve(n=n, g=g, crossing_k=crossing, p_hat=crossing / n)


def empirical_split_point(sample: SortedSample) -> tuple[int, float]:
    """First nonpositive bucket ``k*`` and the split level ``k* / n``."""
    curve = ecf_curve(sample)
    return curve.crossing_k, curve.p_hat


@dataclass(frozen=True)
class TwoClusterSplit:
    """A sample cut after its ``k*``-th order statistic."""

    k_star: int
    p_n: float
    split_value: float
    left: np.ndarray
    right: np.ndarray


def two_cluster_split(sample: SortedSample) -> TwoClusterSplit:
    """Split the sample at the empirical cross-over point.

    ``split_value`` is the boundary order statistic ``W_(k*)``; ``left``
    holds the ``k*`` smallest values, ``right`` the rest.
    """
    k_star, p_n = empirical_split_point(sample)
    return TwoClusterSplit(
        k_star=k_star,
        p_n=p_n,
        split_value=float(sample.values[k_star - 1]),
        left=sample.values[:k_star],
        right=sample.values[k_star:],
    )
