import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfsoliton.errors import ConvergenceError, DomainError
from hopfsoliton.params import HopfParams, derive, ds_dsigma, s_of_sigma, sigma_of_s


@pytest.mark.parametrize(
    "alpha, beta, a, b, rho",
    [(math.exp(-2), math.exp(-2), 1.0, 1.0, 1.0),
     (math.exp(-3), math.exp(-2), 1.5, 1.0, 1.5),
     (math.exp(-4), math.exp(-1), 2.0, 0.5, 4.0)],
)
def test_derive_examples(alpha, beta, a, b, rho):
    p = derive(alpha, beta)
    assert p.a == pytest.approx(a, rel=1e-15)
    assert p.b == pytest.approx(b, rel=1e-15)
    assert p.rho == pytest.approx(rho, rel=1e-15)


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.5), (0.5, 1.0), (1.2, 0.5), (0.6, 0.5), (-0.1, 0.5)])
def test_derive_rejects(alpha, beta):
    with pytest.raises(DomainError):
        derive(alpha, beta)


@given(st.floats(1e-6, 0.999), st.floats(1e-6, 0.999))
def test_rho_at_least_one(u, v):
    alpha, beta = min(u, v), max(u, v)
    p = derive(alpha, beta)
    assert p.rho >= 1.0
    assert (p.rho == 1.0) == (alpha == beta)


def test_from_rho_roundtrip():
    p = HopfParams.from_rho(2.5, b=0.7)
    assert p.a / p.b == pytest.approx(2.5, rel=1e-14)
    assert p.b == pytest.approx(0.7, rel=1e-14)


def test_s_of_sigma_diagonal_is_empty():
    p = derive(math.exp(-2), math.exp(-2))
    for s in (0.5, 1.0, 1.5):
        with pytest.raises(DomainError):
            s_of_sigma(p, s)


def test_s_of_sigma_midpoint():
    p = derive(math.exp(-4), math.exp(-1))
    assert s_of_sigma(p, 1.25) == pytest.approx(0.75 * math.log(0.75), rel=1e-14)


@pytest.mark.parametrize("sigma", [0.5, 2.0, 0.4, 2.5])
def test_s_of_sigma_band_edges(sigma):
    with pytest.raises(DomainError):
        s_of_sigma(derive(math.exp(-4), math.exp(-1)), sigma)


def test_s_is_decreasing_and_diverges():
    # s runs from +inf at the lower end to -inf at the upper end
    p = derive(math.exp(-3), math.exp(-2))
    grid = np.linspace(p.p, p.q, 10_002)[1:-1]
    s = np.array([s_of_sigma(p, g) for g in grid])
    assert np.all(np.diff(s) < 0)
    assert all(ds_dsigma(p, g) < 0 for g in grid[::97])
    assert s_of_sigma(p, p.q - 1e-12) < -10
    assert s_of_sigma(p, p.p + 1e-12) > 10


def test_ds_dsigma_matches_difference_quotient():
    p = derive(math.exp(-3), math.exp(-2))
    for g in (1.1, 1.25, 1.4):
        h = 1e-6
        fd = (s_of_sigma(p, g + h) - s_of_sigma(p, g - h)) / (2 * h)
        assert ds_dsigma(p, g) == pytest.approx(fd, rel=1e-7)


def test_sigma_of_s_inverts_example():
    p = derive(math.exp(-4), math.exp(-1))
    assert sigma_of_s(p, 0.75 * math.log(0.75)) == pytest.approx(1.25, abs=1e-12)


def test_sigma_of_s_random_roundtrip():
    rng = np.random.default_rng(7)
    for p in (derive(math.exp(-3), math.exp(-2)), derive(math.exp(-4), math.exp(-1))):
        for s0 in rng.uniform(p.p, p.q, 100):
            s0 = float(np.clip(s0, p.p + 1e-9, p.q - 1e-9))
            sig = sigma_of_s(p, s_of_sigma(p, s0), tol=1e-12)
            assert abs(sig - s0) <= 1e-10 * max(1.0, s0)


@pytest.mark.parametrize("s, end", [(30.0, "p"), (-30.0, "q")])
def test_sigma_of_s_extremes(s, end):
    # near an end s ~ -(w/2) ln(distance), so distance ~ exp(-2|s|/w)
    p = derive(math.exp(-3), math.exp(-2))
    sig = sigma_of_s(p, s)
    assert abs(sig - getattr(p, end)) < 1e-6


def test_sigma_of_s_iteration_cap():
    p = derive(math.exp(-3), math.exp(-2))
    with pytest.raises(ConvergenceError):
        sigma_of_s(p, 0.123, tol=1e-300, max_iter=5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.99))
def test_sigma_of_s_property(frac):
    p = derive(math.exp(-4), math.exp(-1))
    s0 = p.p + frac * (p.q - p.p)
    assert sigma_of_s(p, s_of_sigma(p, s0)) == pytest.approx(s0, abs=1e-10)
