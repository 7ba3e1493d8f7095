import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sqwalk.errors import QuadratureError
from sqwalk.evolution import evolve
from sqwalk.limits import (
    LimitDensityModel,
    LimitModel,
    grover_delta,
    grover_density,
    grover_params,
    limit_histogram,
    quadrature_mass,
    quadrature_moment,
    sc_density,
    sc_discriminant,
    sc_drift_coefficients,
    scp_density,
)
from sqwalk.state import InitialCoinState
from sqwalk.statistics import distribution, empirical_moment

from conftest import LOCALIZED, SYMMETRIC, random_states

PI2 = math.pi**2


@pytest.mark.parametrize(
    "state,expected",
    [(SYMMETRIC, 0.0), (LOCALIZED, 0.5), (InitialCoinState(1, 0, 0, 0), 0.5)],
)
def test_grover_delta_examples(state, expected):
    assert grover_delta(state) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("state", random_states(20, 1) + [LOCALIZED, SYMMETRIC])
def test_delta_agrees_with_params(state):
    p = grover_params(state)
    assert p.delta == pytest.approx(grover_delta(state), abs=1e-12)
    assert 0.0 <= p.M1 <= 1.0 and -1e-12 <= p.delta <= 1.0 + 1e-12


def test_grover_density_examples():
    assert grover_density(0.9, 0.0, SYMMETRIC) == 0.0
    assert grover_density(0.0, 0.0, LOCALIZED) == pytest.approx(1 / PI2, abs=1e-12)
    assert grover_density(0.0, 0.0, SYMMETRIC) == pytest.approx(2 / PI2, abs=1e-12)


def test_sc_density_examples():
    assert sc_density(0.0, 0.0, LOCALIZED) == pytest.approx(14 / PI2, abs=1e-12)
    assert sc_discriminant(0.2, 0.2) == pytest.approx(-0.2096, abs=1e-4)
    assert sc_density(0.2, 0.2, LOCALIZED) == 0.0
    assert sc_density(1 / 3, 0.0, LOCALIZED) == 0.0


def test_scp_density_examples():
    assert scp_density(0.0, 0.0, LOCALIZED) == pytest.approx(4 / PI2, abs=1e-12)
    assert scp_density(0.3, 0.0, LOCALIZED) == pytest.approx(4 / (PI2 * 0.64) * 1.3, abs=1e-12)
    assert scp_density(0.4, 0.4, LOCALIZED) == 0.0


def test_sc_drift_sign_follows_the_walk():
    # the localized state drifts to negative x and y under the sc coin
    cx, cy = sc_drift_coefficients(LOCALIZED)
    model = LimitDensityModel(LimitModel.SELF_AVOID_COIN, LOCALIZED)
    ref = quadrature_moment(model, 1, 0)
    emp = empirical_moment(distribution(evolve(LOCALIZED, "sc", 300)), 1, 0)
    assert ref < 0 and emp < 0
    assert abs(emp - ref) < 0.05 * abs(ref)
    # flipping both linear coefficients mirrors the first moment
    flipped = _mirrored_sc_moment(-cx, -cy)
    assert flipped == pytest.approx(-ref, abs=1e-7)


def _mirrored_sc_moment(cx, cy):
    model = LimitDensityModel(LimitModel.SELF_AVOID_COIN, LOCALIZED)
    object.__setattr__(model, "_coef", (cx, cy))
    return quadrature_moment(model, 1, 0)


@pytest.mark.parametrize("model", list(LimitModel))
def test_density_nonnegative(model):
    g = np.linspace(-1, 1, 200)
    X, Y = np.meshgrid(g, g, indexing="ij")
    for s in random_states(50, 7):
        v = LimitDensityModel(model, s).density(X, Y)
        assert np.all(np.isfinite(v)) and np.all(v >= -1e-12)


@pytest.mark.parametrize("model", list(LimitModel))
def test_support_symmetry(model):
    rng = np.random.default_rng(5)
    x, y = rng.uniform(-0.8, 0.8, (2, 20000))
    m = LimitDensityModel(model, LOCALIZED)
    s = m.support(x, y)
    assert np.array_equal(s, m.support(-x, -y))
    assert np.array_equal(s, m.support(y, x))


@pytest.mark.parametrize("model", list(LimitModel))
def test_density_vanishes_off_support(model):
    rng = np.random.default_rng(9)
    x, y = rng.uniform(-1, 1, (2, 50000))
    m = LimitDensityModel(model, random_states(1, 2)[0])
    assert np.all(m.density(x, y)[~m.support(x, y)] == 0.0)


@pytest.mark.parametrize(
    "model,res,tol",
    [
        (LimitModel.SELF_AVOID_COIN_POSITION, 512, 1e-4),
        (LimitModel.SELF_AVOID_COIN, 1024, 1e-3),
    ],
)
def test_mass_examples(model, res, tol):
    assert abs(quadrature_mass(LimitDensityModel(model, SYMMETRIC), res) - 1) <= tol


def test_grover_continuous_mass_is_one_minus_delta():
    m = LimitDensityModel(LimitModel.GROVER, LOCALIZED)
    assert abs(quadrature_mass(m, 1024) - 0.5) <= 1e-3
    assert quadrature_moment(m, 0, 0) == pytest.approx(m.point_mass + quadrature_mass(m), abs=1e-15)


def test_scp_symmetric_first_moment():
    m = LimitDensityModel(LimitModel.SELF_AVOID_COIN_POSITION, SYMMETRIC)
    # eta is 1 + x - y for this state
    assert quadrature_moment(m, 1, 0) == pytest.approx(quadrature_moment(m, 2, 0), abs=1e-6)
    assert quadrature_moment(m, 0, 1) == pytest.approx(-quadrature_moment(m, 0, 2), abs=1e-6)
    assert abs(quadrature_moment(m, 1, 1)) <= 1e-6


def test_scp_localized_first_moment_equals_second():
    m = LimitDensityModel(LimitModel.SELF_AVOID_COIN_POSITION, LOCALIZED)
    assert quadrature_moment(m, 1, 0) == pytest.approx(quadrature_moment(m, 2, 0), abs=1e-7)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(LimitModel)))
def test_resolution_doubling_converges(seed, model):
    s = random_states(1, seed)[0]
    total = quadrature_moment(LimitDensityModel(model, s), 0, 0, 128, tol=1e-6)
    assert abs(total - 1) <= 1e-3


def test_doubling_check_raises_when_unresolved():
    with pytest.raises(QuadratureError):
        quadrature_mass(LimitDensityModel(LimitModel.SELF_AVOID_COIN, LOCALIZED), 64, tol=1e-16)


def test_resolution_floor():
    with pytest.raises(ValueError):
        quadrature_mass(LimitDensityModel(LimitModel.GROVER, LOCALIZED), 16)


@pytest.mark.parametrize("model", list(LimitModel))
@pytest.mark.parametrize("bins", [20, 21, 50])
def test_limit_histogram_total(model, bins):
    h = limit_histogram(LimitDensityModel(model, LOCALIZED), bins)
    assert abs(h.total() - 1) <= 2e-6


def test_grover_histogram_atom_in_origin_bin():
    m = LimitDensityModel(LimitModel.GROVER, LOCALIZED)
    h = limit_histogram(m, 20)
    assert h.point_mass == 0.5
    assert h.values[10, 10] > 0.5
