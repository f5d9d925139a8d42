"""Influence-function asymptotics for the empirical cross-over function.

At level ``p`` with quantile ``q`` and density ``f(q) > 0`` the influence
function of the cross-over statistic is

    theta(w) = (w - q) / p        + 2 / f(q)   for w <= q
             = (w - q) / (1 - p)               for w >  q

and root-n times the estimation error converges to a centered normal with
variance ``Var theta(W)``.  This module computes that variance (and the
covariance across levels) by quadrature over the probability transform,
estimates it from data by a plug-in rule, and provides the one-step Newton
refinement of an empirical split level.

``influence`` also reports the three textbook pieces of theta: a lower
trimmed-mean part ``xi``, an upper part ``tau``, and a quantile part
``kappa``, each centered to mean zero, with ``z = xi + tau - 2 * kappa``
differing from theta only by the constant ``crossover(p) + 2p / f(q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .empirical import SortedSample, bucket_index, ecf_eval
from .errors import (
    BandwidthError,
    DegenerateDerivativeError,
    DensityEstimateError,
    DomainError,
    NumericalError,
    SingularityError,
)
from .models import Distribution, SplitDiagnostics, check_level, find_split_point

__all__ = [
    "InfluenceDecomposition",
    "CovSpec",
    "influence",
    "asymptotic_variance",
    "asymptotic_cov",
    "covariance_grid",
    "plugin_variance",
    "newton_split_estimate",
]

# A covariance grid is accepted as positive semidefinite when its smallest
# eigenvalue is above this (quadrature noise can push it slightly negative).
PSD_TOL = 1e-8


def _density_at_quantile(model: Distribution, p: float) -> tuple[float, float]:
    q = float(model.quantile(p))
    dens = float(model.pdf(q))
    if not math.isfinite(dens) or dens <= 0.0:
        raise SingularityError(f"density at the {p}-quantile is {dens!r}")
    return q, dens


@dataclass(frozen=True)
class InfluenceDecomposition:
    """Influence value ``theta`` and its centered parts at one observation."""

    xi: float
    tau: float
    kappa: float
    theta: float

    @property
    def z(self) -> float:
        """The centered combination ``xi + tau - 2 * kappa``."""
        return self.xi + self.tau - 2.0 * self.kappa


def influence(model: Distribution, p: float, w: float) -> InfluenceDecomposition:
    """Evaluate the influence function and its decomposition at ``w``."""
    p = check_level(p)
    w = float(w)
    if not math.isfinite(w):
        raise DomainError(f"observation must be finite, got {w!r}")
    q, dens = _density_at_quantile(model, p)
    mu_lo = model.lower_mean(p)
    mu_hi = model.upper_mean(p)

    below = w <= q
    if below:
        theta = (w - q) / p + 2.0 / dens
        xi = (w - q) / p - (mu_lo - q)
        tau = -(mu_hi - q)
    else:
        theta = (w - q) / (1.0 - p)
        xi = -(mu_lo - q)
        tau = (w - q) / (1.0 - p) - (mu_hi - q)
    kappa = (p - (1.0 if below else 0.0)) / dens
    return InfluenceDecomposition(xi=xi, tau=tau, kappa=kappa, theta=theta)


def _theta_on_levels(model: Distribution, p: float):
    """theta composed with the quantile, as a function of u in (0, 1)."""
    q, dens = _density_at_quantile(model, p)
    jump = 2.0 / dens

    def theta_u(u: float) -> float:
        w = float(model.quantile(u))
        if u <= p:
            return (w - q) / p + jump
        return (w - q) / (1.0 - p)

    return theta_u


def _theta_mean(model: Distribution, p: float, theta_u) -> float:
    return quadrature.unit_integral(theta_u, breakpoints=(p,))


def asymptotic_cov(model: Distribution, p: float, r: float) -> float:
    """Limit covariance of the cross-over statistic between levels p and r."""
    p = check_level(p, "p")
    r = check_level(r, "r")
    theta_p = _theta_on_levels(model, p)
    theta_r = _theta_on_levels(model, r)
    mean_p = _theta_mean(model, p, theta_p)
    mean_r = _theta_mean(model, r, theta_r)
    cross = quadrature.unit_integral(
        lambda u: theta_p(u) * theta_r(u), breakpoints=(p, r)
    )
    return cross - mean_p * mean_r


def asymptotic_variance(model: Distribution, p: float) -> float:
    """Limit variance of root-n times the cross-over estimation error."""
    return asymptotic_cov(model, p, p)


@dataclass(frozen=True)
class CovSpec:
    """Limit covariance matrix of the cross-over process on a level grid."""

    grid: np.ndarray
    matrix: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def to_dict(self) -> dict:
        return {"grid": self.grid.tolist(), "matrix": self.matrix.tolist()}

    def to_csv(self) -> str:
        """Grid levels on the first line, then the matrix row-major."""
        lines = [",".join(format(p, ".9g") for p in self.grid)]
        for row in self.matrix:
            lines.append(",".join(format(v, ".9g") for v in row))
        return "\n".join(lines) + "\n"


def covariance_grid(model: Distribution, grid) -> CovSpec:
    """Limit covariance matrix over an ascending grid of levels in (0, 1).

    The matrix is filled on the upper triangle and mirrored, so it is
    symmetric by construction; a smallest eigenvalue below ``-PSD_TOL``
    raises :class:`NumericalError`.
    """
    levels = np.asarray(grid, dtype=float)
    if levels.ndim != 1 or levels.size < 1:
        raise DomainError("grid must be a nonempty one-dimensional sequence")
    if not np.all((levels > 0.0) & (levels < 1.0)):
        raise DomainError("grid levels must lie in (0, 1)")
    if np.any(np.diff(levels) <= 0.0):
        raise DomainError("grid levels must be strictly increasing")

    m = levels.size
    thetas = [_theta_on_levels(model, float(p)) for p in levels]
    means = [_theta_mean(model, float(p), thetas[i]) for i, p in enumerate(levels)]

    matrix = np.empty((m, m), dtype=float)
    for i in range(m):
        for j in range(i, m):
            cross = quadrature.unit_integral(
                lambda u: thetas[i](u) * thetas[j](u),
                breakpoints=(float(levels[i]), float(levels[j])),
            )
            value = cross - means[i] * means[j]
            matrix[i, j] = value
            matrix[j, i] = value

    spec = CovSpec(grid=levels.copy(), matrix=matrix)
    smallest = spec.min_eigenvalue()
    if smallest < -PSD_TOL:
        raise NumericalError(
            f"covariance grid is not positive semidefinite: min eigenvalue {smallest:.3g}"
        )
    return spec


def plugin_variance(sample: SortedSample, p: float, bandwidth: float | None = None) -> float:
    """Plug-in estimate of the limit variance from a sample.

    The quantile is the bucket order statistic, the density is estimated
    from the quantile spacing ``2h / (Q(p + h) - Q(p - h))`` with default
    bandwidth ``n ** (-1/5)``, and the variance is the ddof-1 sample
    variance of the estimated influence values.
    """
    p = check_level(p)
    n = sample.n
    if n < 20:
        raise DomainError(f"plug-in variance needs n >= 20, got n={n}")
    h = float(bandwidth) if bandwidth is not None else float(n) ** -0.2
    if not h > 0.0:
        raise DomainError(f"bandwidth must be positive, got {h!r}")
    if p - h <= 0.0 or p + h >= 1.0:
        raise BandwidthError(
            f"bandwidth {h:.4g} reaches outside (0, 1) around p={p}"
        )

    v = sample.values
    q_hat = v[bucket_index(n, p) - 1]
    spread = v[bucket_index(n, p + h) - 1] - v[bucket_index(n, p - h) - 1]
    if spread <= 0.0:
        raise DensityEstimateError(
            f"quantile spacing around p={p} is {spread!r}; density estimate degenerate"
        )
    dens = 2.0 * h / spread

    below = v <= q_hat
    theta = np.where(below, (v - q_hat) / p + 2.0 / dens, (v - q_hat) / (1.0 - p))
    return float(np.var(theta, ddof=1))


def newton_split_estimate(
    model: Distribution,
    sample: SortedSample,
    split: SplitDiagnostics | None = None,
) -> float:
    """One Newton step from the model split level toward the sample's.

    Returns ``p0 - g_n(p0) / crossover_slope(p0)`` where ``g_n`` is the
    empirical cross-over function.  Raises
    :class:`DegenerateDerivativeError` when the slope vanishes.
    """
    if split is None:
        split = find_split_point(model)
    slope = model.crossover_slope(split.p0)
    if not math.isfinite(slope) or slope == 0.0:
        raise DegenerateDerivativeError(
            f"crossover slope at p0={split.p0} is {slope!r}"
        )
    return split.p0 - ecf_eval(sample, split.p0) / slope
