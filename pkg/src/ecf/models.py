"""Population-level two-cluster theory for parametric models.

A :class:`Distribution` exposes its quantile function, density, and CDF.
From those we derive, for a split level ``p`` in (0, 1):

* ``lower_mean`` / ``upper_mean``: the means of the two clusters obtained
  by cutting the population at its ``p``-quantile,
* ``split_function``: the between-cluster sum of squares of that cut,
* ``crossover``: ``lower_mean + upper_mean - 2 * quantile``, whose zero is
  a stationary point of the split function,
* ``crossover_slope``: the derivative of ``crossover``, used by the Newton
  diagnostic and by variance formulas downstream.

:func:`find_split_point` locates the crossing of ``crossover`` inside a
bracket and reports the maximizing root together with diagnostics.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from . import quadrature
from .errors import DomainError, NoCrossingError, SingularityError

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def check_level(p, name: str = "p") -> float:
    """Validate a probability level in the open unit interval."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {p!r}")
    return p


def _check_prob_array(p):
    arr = np.asarray(p, dtype=float)
    if arr.size and not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("probability levels must lie in (0, 1)")
    return arr


def _match(out, arr):
    # scalar in, scalar out
    return float(out) if arr.ndim == 0 else out


class Distribution(ABC):
    """A continuous law with an invertible CDF and a positive density.

    ``quantile``, ``pdf`` and ``cdf`` accept scalars or numpy arrays and
    return matching shapes.  Moments default to numerical integration of
    the quantile function; the built-in families override them with closed
    forms.
    """

    @abstractmethod
    def quantile(self, p):
        """Inverse CDF at probability level(s) ``p`` in (0, 1)."""

    @abstractmethod
    def pdf(self, x):
        """Density at ``x``."""

    @abstractmethod
    def cdf(self, x):
        """Distribution function at ``x``."""

    def mean(self) -> float:
        return self.partial_mean(1.0)

    def partial_mean(self, p) -> float:
        """Integral of the quantile function over (0, p), for p in [0, 1]."""
        return self.partial_mean_quad(p)

    def partial_mean_quad(self, p) -> float:
        """Quantile integral over (0, p) by adaptive quadrature.

        Kept separate from :meth:`partial_mean` so closed forms can be
        cross-checked against the generic route.
        """
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {p!r}")
        if p <= quadrature.EDGE:
            return 0.0
        return quadrature.unit_integral(lambda u: float(self.quantile(u)), 0.0, p)

    def lower_mean(self, p) -> float:
        """Mean of the cluster below the p-quantile."""
        p = check_level(p)
        return self.partial_mean(p) / p

    def upper_mean(self, p) -> float:
        """Mean of the cluster above the p-quantile."""
        p = check_level(p)
        return (self.mean() - self.partial_mean(p)) / (1.0 - p)

    def crossover(self, p) -> float:
        """lower_mean + upper_mean - 2 * quantile at level p.

        Positive while the quantile sits below the midpoint of the two
        cluster means, zero exactly at a stationary split.
        """
        p = check_level(p)
        return self.lower_mean(p) + self.upper_mean(p) - 2.0 * float(self.quantile(p))

    def split_function(self, p) -> float:
        """Between-cluster sum of squares of the cut at level p."""
        p = check_level(p)
        mu_lo = self.lower_mean(p)
        mu_hi = self.upper_mean(p)
        m = self.mean()
        return p * mu_lo * mu_lo + (1.0 - p) * mu_hi * mu_hi - m * m

    def split_function_slope(self, p) -> float:
        """Derivative of the split function in p.

        Computed literally as ``(upper_mean - lower_mean) * crossover`` so
        that it vanishes exactly where ``crossover`` does.
        """
        p = check_level(p)
        return (self.upper_mean(p) - self.lower_mean(p)) * self.crossover(p)

    def crossover_slope(self, p) -> float:
        """Derivative of ``crossover`` in p; needs a positive density at the quantile."""
        p = check_level(p)
        q = float(self.quantile(p))
        dens = float(self.pdf(q))
        if not math.isfinite(dens) or dens <= 0.0:
            raise SingularityError(
                f"density at the {p}-quantile is {dens!r}; slope undefined"
            )
        return (q - self.lower_mean(p)) / p + (self.upper_mean(p) - q) / (1.0 - p) - 2.0 / dens


@dataclass(frozen=True)
class Normal(Distribution):
    """Gaussian law with location ``loc`` and standard deviation ``scale``."""

    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.loc) and math.isfinite(self.scale)):
            raise DomainError("normal parameters must be finite")
        if not self.scale > 0.0:
            raise DomainError(f"scale must be positive, got {self.scale!r}")

    def quantile(self, p):
        arr = _check_prob_array(p)
        return _match(self.loc + self.scale * ndtri(arr), arr)

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        return _match(ndtr((arr - self.loc) / self.scale), arr)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        z = (arr - self.loc) / self.scale
        return _match(np.exp(-0.5 * z * z) / (self.scale * _SQRT_2PI), arr)

    def mean(self) -> float:
        return self.loc

    def partial_mean(self, p) -> float:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {p!r}")
        if p == 0.0:
            return 0.0
        if p == 1.0:
            return self.loc
        z = float(ndtri(p))
        return self.loc * p - self.scale * math.exp(-0.5 * z * z) / _SQRT_2PI


@dataclass(frozen=True)
class Exponential(Distribution):
    """Exponential law with the given rate (mean ``1 / rate``)."""

    rate: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise DomainError(f"rate must be positive and finite, got {self.rate!r}")

    def quantile(self, p):
        arr = _check_prob_array(p)
        return _match(-np.log1p(-arr) / self.rate, arr)

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        return _match(np.where(arr > 0.0, -np.expm1(-self.rate * arr), 0.0), arr)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            dens = np.where(arr >= 0.0, self.rate * np.exp(-self.rate * arr), 0.0)
        return _match(dens, arr)

    def mean(self) -> float:
        return 1.0 / self.rate

    def partial_mean(self, p) -> float:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {p!r}")
        if p == 1.0:
            return 1.0 / self.rate
        return (p + (1.0 - p) * math.log1p(-p)) / self.rate


@dataclass(frozen=True)
class Uniform(Distribution):
    """Uniform law on the interval [lo, hi]."""

    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError("uniform endpoints must be finite")
        if not self.hi > self.lo:
            raise DomainError(f"need hi > lo, got [{self.lo!r}, {self.hi!r}]")

    def quantile(self, p):
        arr = _check_prob_array(p)
        return _match(self.lo + (self.hi - self.lo) * arr, arr)

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        return _match(np.clip((arr - self.lo) / (self.hi - self.lo), 0.0, 1.0), arr)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        inside = (arr >= self.lo) & (arr <= self.hi)
        return _match(np.where(inside, 1.0 / (self.hi - self.lo), 0.0), arr)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def partial_mean(self, p) -> float:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {p!r}")
        return self.lo * p + 0.5 * (self.hi - self.lo) * p * p


class QuantileModel(Distribution):
    """A law supplied as a (quantile, pdf) pair of callables.

    The CDF inverts the quantile by bisection over probability levels, and
    moments fall back to quadrature.  The quantile must be continuous and
    nondecreasing on (0, 1).
    """

    def __init__(
        self,
        quantile: Callable[[float], float],
        pdf: Callable[[float], float],
        name: str = "custom",
    ):
        self._quantile = quantile
        self._pdf = pdf
        self.name = name
        self._mean: float | None = None

    def quantile(self, p):
        arr = _check_prob_array(p)
        if arr.ndim == 0:
            return float(self._quantile(float(arr)))
        return np.array([float(self._quantile(float(u))) for u in arr])

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return float(self._pdf(float(arr)))
        return np.array([float(self._pdf(float(v))) for v in arr])

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return self._cdf_scalar(float(arr))
        return np.array([self._cdf_scalar(float(v)) for v in arr])

    def _cdf_scalar(self, x: float) -> float:
        lo, hi = quadrature.EDGE, 1.0 - quadrature.EDGE
        if x <= float(self._quantile(lo)):
            return 0.0
        if x >= float(self._quantile(hi)):
            return 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if float(self._quantile(mid)) <= x:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def mean(self) -> float:
        if self._mean is None:
            self._mean = self.partial_mean_quad(1.0)
        return self._mean


_NORMAL_ALIASES = ("normal", "norm", "gaussian")
_EXP_ALIASES = ("exp", "exponential")
_UNIFORM_ALIASES = ("uniform", "unif")


def parse_model(text: str) -> Distribution:
    """Build a model from a compact string spec.

    Accepted forms: ``normal:LOC,SCALE``, ``exp:RATE``, ``uniform:LO,HI``.
    Raises :class:`DomainError` on anything else.
    """
    if not isinstance(text, str):
        raise DomainError(f"model spec must be a string, got {type(text).__name__}")
    name, sep, argpart = text.strip().partition(":")
    name = name.strip().lower()
    if not sep:
        raise DomainError(
            f"model spec {text!r} is missing parameters; expected e.g. 'normal:0,1'"
        )
    raw = [piece.strip() for piece in argpart.split(",")]
    try:
        args = [float(piece) for piece in raw]
    except ValueError:
        raise DomainError(f"model spec {text!r} has a non-numeric parameter") from None
    if any(not math.isfinite(v) for v in args):
        raise DomainError(f"model spec {text!r} has a non-finite parameter")

    if name in _NORMAL_ALIASES:
        if len(args) != 2:
            raise DomainError("normal takes exactly two parameters: loc,scale")
        return Normal(args[0], args[1])
    if name in _EXP_ALIASES:
        if len(args) != 1:
            raise DomainError("exp takes exactly one parameter: rate")
        return Exponential(args[0])
    if name in _UNIFORM_ALIASES:
        if len(args) != 2:
            raise DomainError("uniform takes exactly two parameters: lo,hi")
        return Uniform(args[0], args[1])
    raise DomainError(f"unknown model family {name!r}; try normal, exp, or uniform")


@dataclass(frozen=True)
class SplitDiagnostics:
    """Result of a split-point search.

    ``p0`` maximizes the split function among the roots of ``crossover``
    found inside the bracket; ``roots`` lists all of them in increasing
    order.  ``derivative_residual`` is ``|split_function_slope(p0)|`` and
    ``final_bracket`` is the bisection interval that isolated ``p0``.
    """

    p0: float
    split_value: float
    b_at_p0: float
    derivative_residual: float
    roots: tuple[float, ...]
    final_bracket: tuple[float, float]


def _bisect_crossover(model: Distribution, lo: float, hi: float, g_lo: float, tol: float):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = model.crossover(mid)
        if g_mid == 0.0:
            return mid, mid
        if (g_lo > 0.0) == (g_mid > 0.0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return lo, hi


def find_split_point(
    model: Distribution,
    bracket: tuple[float, float] = (0.01, 0.99),
    *,
    grid_points: int = 512,
    tol: float = 1e-10,
) -> SplitDiagnostics:
    """Locate the split level where ``crossover`` changes sign.

    The bracket is scanned on a uniform grid, every sign change is refined
    by bisection to width ``tol``, and the root with the largest split
    function value wins.  Raises :class:`NoCrossingError` when the scan
    finds no sign change.
    """
    lo_b, hi_b = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo_b < hi_b < 1.0):
        raise DomainError(f"bracket must satisfy 0 < lo < hi < 1, got {bracket!r}")
    if grid_points < 2:
        raise DomainError("grid_points must be at least 2")
    if not tol > 0.0:
        raise DomainError("tol must be positive")

    grid = np.linspace(lo_b, hi_b, grid_points)
    g = np.array([model.crossover(float(p)) for p in grid])

    roots: list[float] = []
    spans: list[tuple[float, float]] = []
    for i in range(grid_points - 1):
        if g[i] == 0.0:
            roots.append(float(grid[i]))
            spans.append((float(grid[i]), float(grid[i])))
        elif (g[i] > 0.0) != (g[i + 1] > 0.0) and g[i + 1] != 0.0:
            a, b = _bisect_crossover(model, float(grid[i]), float(grid[i + 1]), float(g[i]), tol)
            roots.append(0.5 * (a + b))
            spans.append((a, b))
    if g[-1] == 0.0:
        roots.append(float(grid[-1]))
        spans.append((float(grid[-1]), float(grid[-1])))

    if not roots:
        raise NoCrossingError(
            f"crossover has no sign change on [{lo_b}, {hi_b}] with {grid_points} grid points"
        )

    values = [model.split_function(r) for r in roots]
    best = max(range(len(roots)), key=values.__getitem__)
    p0 = roots[best]
    return SplitDiagnostics(
        p0=p0,
        split_value=float(model.quantile(p0)),
        b_at_p0=values[best],
        derivative_residual=abs(model.split_function_slope(p0)),
        roots=tuple(roots),
        final_bracket=spans[best],
    )
