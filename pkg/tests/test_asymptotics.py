import math

import numpy as np
import pytest
from scipy.integrate import quad

from ecf.asymptotics import (
    asymptotic_cov,
    asymptotic_variance,
    covariance_grid,
    influence,
    newton_split_estimate,
    plugin_variance,
)
from ecf.empirical import SortedSample, empirical_split_point
from ecf.errors import (
    BandwidthError,
    DegenerateDerivativeError,
    DensityEstimateError,
    DomainError,
)
from ecf.models import Exponential, Normal, Uniform, find_split_point
from ecf.rng import substream
from ecf.simulate import sample_iid

# Analytic limit variances at p = 1/2, worked out by hand from the
# piecewise influence integrals.
NORMAL_SIGMA_HALF = 2.0 * math.pi - 4.0
EXP_SIGMA_HALF = 8.0 * (1.0 - math.log(2.0))
UNIFORM_SIGMA_HALF = 1.0 / 3.0

MODELS = [Normal(0.0, 1.0), Exponential(1.0), Uniform(0.0, 1.0)]


def _theta_parts(model, p):
    q = float(model.quantile(p))
    dens = float(model.pdf(q))

    def theta(u):
        w = float(model.quantile(u))
        if u <= p:
            return (w - q) / p + 2.0 / dens
        return (w - q) / (1.0 - p)

    return theta


def _quad_moment(f, points):
    # independent integration route for the oracle values
    val, _ = quad(f, 1e-13, 1.0 - 1e-13, points=sorted(points), limit=400, epsabs=1e-11)
    return val


# -------------------------------------------------------------- influence


def test_influence_examples_uniform():
    model = Uniform(0.0, 1.0)
    assert influence(model, 0.5, 0.25).theta == pytest.approx(1.5, abs=1e-14)
    assert influence(model, 0.5, 0.75).theta == pytest.approx(0.5, abs=1e-14)
    # the indicator is closed at the quantile, so w = q takes the lower branch
    assert influence(model, 0.5, 0.5).theta == pytest.approx(2.0, abs=1e-14)


def test_influence_at_quantile_is_two_over_density():
    for model in MODELS:
        for p in (0.3, 0.5, 0.7):
            q = float(model.quantile(p))
            dens = float(model.pdf(q))
            assert influence(model, p, q).theta == pytest.approx(2.0 / dens, rel=1e-12)


def test_influence_validation():
    with pytest.raises(DomainError):
        influence(Normal(), 0.0, 1.0)
    with pytest.raises(DomainError):
        influence(Normal(), 0.5, math.nan)


def test_decomposition_combination_offset():
    # theta - z is the constant crossover + 2p/f(q), whatever w is
    for model in MODELS:
        for p in (0.3, 0.5, 0.7):
            q = float(model.quantile(p))
            dens = float(model.pdf(q))
            offset = model.crossover(p) + 2.0 * p / dens
            for w in (q - 1.0, q - 1e-3, q, q + 1e-3, q + 1.0):
                dec = influence(model, p, w)
                assert dec.theta - dec.z == pytest.approx(offset, rel=1e-10, abs=1e-10)


def test_decomposition_parts_are_centered():
    for model, p in ((Normal(0.0, 1.0), 0.3), (Exponential(1.0), 0.6)):
        for part in ("xi", "tau", "kappa"):
            mean = _quad_moment(
                lambda u: getattr(influence(model, p, float(model.quantile(u))), part),
                points=(p,),
            )
            assert mean == pytest.approx(0.0, abs=1e-8)


def test_influence_mean_is_crossover_plus_quantile_term():
    for model in MODELS:
        for p in (0.3, 0.5, 0.7):
            q = float(model.quantile(p))
            dens = float(model.pdf(q))
            want = model.crossover(p) + 2.0 * p / dens
            theta = _theta_parts(model, p)
            assert _quad_moment(theta, points=(p,)) == pytest.approx(want, abs=1e-8)


# ------------------------------------------------------ variance at a level


def test_variance_closed_form_values():
    assert asymptotic_variance(Normal(0.0, 1.0), 0.5) == pytest.approx(
        NORMAL_SIGMA_HALF, abs=1e-8
    )
    assert asymptotic_variance(Exponential(1.0), 0.5) == pytest.approx(
        EXP_SIGMA_HALF, abs=1e-8
    )
    assert asymptotic_variance(Uniform(0.0, 1.0), 0.5) == pytest.approx(
        UNIFORM_SIGMA_HALF, abs=1e-10
    )


def test_variance_positive_and_scales_with_squared_spread():
    for model in MODELS:
        for p in (0.2, 0.5, 0.8):
            assert asymptotic_variance(model, p) > 0.0
    for c in (0.5, 2.0):
        got = asymptotic_variance(Normal(0.0, c), 0.5)
        assert got == pytest.approx(c * c * NORMAL_SIGMA_HALF, rel=1e-7)
    # location does not matter
    got = asymptotic_variance(Normal(13.0, 1.0), 0.5)
    assert got == pytest.approx(NORMAL_SIGMA_HALF, abs=1e-8)


def test_variance_matches_independent_quadrature():
    for model in MODELS:
        for p in (0.25, 0.5, 0.75):
            theta = _theta_parts(model, p)
            m1 = _quad_moment(theta, points=(p,))
            m2 = _quad_moment(lambda u: theta(u) ** 2, points=(p,))
            assert asymptotic_variance(model, p) == pytest.approx(m2 - m1 * m1, abs=1e-7)


def test_variance_matches_monte_carlo():
    # direct draw route, no quadrature involved
    for model, p in ((Normal(0.0, 1.0), 0.5), (Exponential(1.0), 0.4), (Uniform(0.0, 1.0), 0.7)):
        sample = sample_iid(model, 400000, substream(99, 0))
        thetas = np.array([influence(model, p, w).theta for w in sample.values[::40]])
        mc = float(np.var(thetas, ddof=1))
        assert asymptotic_variance(model, p) == pytest.approx(mc, rel=0.1)


def test_variance_of_z_equals_variance_of_theta():
    for model, p in ((Normal(0.0, 1.0), 0.5), (Exponential(1.0), 0.7)):
        z = lambda u: influence(model, p, float(model.quantile(u))).z
        m1 = _quad_moment(z, points=(p,))
        m2 = _quad_moment(lambda u: z(u) ** 2, points=(p,))
        assert asymptotic_variance(model, p) == pytest.approx(m2 - m1 * m1, abs=1e-7)


# ----------------------------------------------------- covariance of levels


def test_cov_diagonal_equals_variance_bitwise():
    for model in MODELS:
        for p in (0.3, 0.5, 0.7):
            assert asymptotic_cov(model, p, p) == asymptotic_variance(model, p)


def test_cov_is_symmetric_bitwise():
    for model in MODELS:
        assert asymptotic_cov(model, 0.3, 0.7) == asymptotic_cov(model, 0.7, 0.3)


def test_cov_matches_independent_quadrature():
    for model in MODELS:
        theta_a = _theta_parts(model, 0.3)
        theta_b = _theta_parts(model, 0.7)
        m_a = _quad_moment(theta_a, points=(0.3,))
        m_b = _quad_moment(theta_b, points=(0.7,))
        m_ab = _quad_moment(lambda u: theta_a(u) * theta_b(u), points=(0.3, 0.7))
        assert asymptotic_cov(model, 0.3, 0.7) == pytest.approx(m_ab - m_a * m_b, abs=1e-7)


def test_covariance_grid_single_level():
    spec = covariance_grid(Normal(0.0, 1.0), [0.5])
    assert spec.matrix.shape == (1, 1)
    assert spec.matrix[0, 0] == pytest.approx(NORMAL_SIGMA_HALF, abs=1e-8)


def test_covariance_grid_symmetry_and_psd():
    grid = np.linspace(0.1, 0.9, 9)
    spec = covariance_grid(Exponential(1.0), grid)
    assert spec.matrix.shape == (9, 9)
    assert np.array_equal(spec.matrix, spec.matrix.T)
    assert spec.min_eigenvalue() >= -1e-8
    # diagonal entries are the per-level variances
    for i, p in enumerate(grid):
        assert spec.matrix[i, i] == asymptotic_variance(Exponential(1.0), float(p))


def test_covariance_grid_validation():
    with pytest.raises(DomainError):
        covariance_grid(Normal(), [])
    with pytest.raises(DomainError):
        covariance_grid(Normal(), [0.5, 0.3])
    with pytest.raises(DomainError):
        covariance_grid(Normal(), [0.0, 0.5])


def test_covariance_grid_serialization():
    spec = covariance_grid(Uniform(0.0, 1.0), [0.3, 0.7])
    data = spec.to_dict()
    assert data["grid"] == [0.3, 0.7]
    assert len(data["matrix"]) == 2
    csv = spec.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "0.3,0.7"
    assert len(lines) == 3


# ------------------------------------------------------------ plug-in route


def test_plugin_variance_converges_to_limit():
    for spec, p in (("normal:0,1", 0.5), ("exp:1", 0.5)):
        from ecf.models import parse_model

        model = parse_model(spec)
        sample = sample_iid(model, 100000, substream(0, 0))
        est = plugin_variance(sample, p)
        assert est == pytest.approx(asymptotic_variance(model, p), rel=0.1)


def test_plugin_variance_validation():
    sample = sample_iid(Normal(0.0, 1.0), 1000, substream(1, 0))
    with pytest.raises(DomainError):
        plugin_variance(SortedSample(np.arange(10.0)), 0.5)
    with pytest.raises(DomainError):
        plugin_variance(sample, 0.5, bandwidth=0.0)
    with pytest.raises(BandwidthError):
        plugin_variance(sample, 0.5, bandwidth=0.6)
    with pytest.raises(BandwidthError):
        plugin_variance(sample, 0.01, bandwidth=None)


def test_plugin_variance_degenerate_spacing():
    flat = SortedSample(np.full(100, 5.0))
    with pytest.raises(DensityEstimateError):
        plugin_variance(flat, 0.5)


def test_plugin_variance_near_degenerate_does_not_crash():
    rng = np.random.default_rng(17)
    nearly_flat = 5.0 + 1e-12 * rng.random(200)
    value = plugin_variance(SortedSample(nearly_flat), 0.5)
    assert math.isfinite(value)
    assert value >= 0.0


# ----------------------------------------------------------- newton step


def test_newton_with_exact_zero_curve_returns_p0():
    model = Uniform(0.0, 1.0)
    split = find_split_point(model)
    # curve value at p0 = 0.5 is exactly zero for this sample
    sample = SortedSample([1.0, 2.0, 3.0, 4.0])
    assert newton_split_estimate(model, sample, split) == split.p0


def test_newton_tracks_empirical_split():
    for model in (Uniform(0.0, 1.0), Exponential(1.0)):
        split = find_split_point(model)
        sample = sample_iid(model, 10000, substream(0, 1))
        newton = newton_split_estimate(model, sample, split)
        _, p_n = empirical_split_point(sample)
        assert abs(newton - p_n) <= 0.02


def test_newton_finds_split_when_not_given():
    sample = sample_iid(Uniform(0.0, 1.0), 1000, substream(3, 0))
    got = newton_split_estimate(Uniform(0.0, 1.0), sample)
    assert got == pytest.approx(0.5, abs=0.1)


def test_newton_degenerate_slope_raises():
    class FlatSlope(Uniform):
        def crossover_slope(self, p):
            return 0.0

    model = FlatSlope(0.0, 1.0)
    sample = SortedSample([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(DegenerateDerivativeError):
        newton_split_estimate(model, sample)
