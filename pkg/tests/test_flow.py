import math

import numpy as np
import pytest
from scipy.linalg import expm

from hopfsoliton.errors import DomainError, StabilityError
from hopfsoliton.flow import C_CFL, FlowBackground, FlowState, diagnose, flow_rhs, run, step


@pytest.fixture(scope="module")
def round_bg(round_profile):
    return FlowBackground.from_profile(round_profile, n=64)


@pytest.fixture(scope="module")
def bg15(profile15):
    return FlowBackground.from_profile(profile15, n=128)


def test_round_rhs(round_bg):
    du, df1 = flow_rhs(round_bg, FlowState.zero(round_bg))
    assert np.max(np.abs(du)) <= 1e-13
    assert np.allclose(df1, 0.5, atol=1e-13)


@pytest.mark.parametrize("c", [-0.3, 0.2, 1.0])
def test_constant_conformal_factor(round_bg, c):
    st = FlowState(0.0, np.full(round_bg.n, c), np.zeros(round_bg.n))
    du, df1 = flow_rhs(round_bg, st)
    expect = -0.25 * (2 * math.exp(-2 * c) - 2 * math.exp(-4 * c))
    assert np.allclose(du, expect, atol=1e-13)
    assert np.allclose(df1, 0.5 * math.exp(-2 * c), atol=1e-13)


def test_laplacian_conservative(bg15):
    rng = np.random.default_rng(3)
    v = rng.standard_normal(bg15.n)
    assert abs(np.sum(bg15.vol * bg15.laplacian(v))) <= 1e-12
    assert np.max(np.abs(bg15.laplacian(np.ones(bg15.n)))) == 0
    M = bg15.laplacian_matrix()
    S = bg15.vol[:, None] * M
    assert np.allclose(S, S.T, atol=1e-12)


def test_laplacian_first_harmonic(round_profile):
    # cos r is an eigenfunction of the round Laplacian with eigenvalue -2
    errs = []
    for n in (64, 128, 256):
        bg = FlowBackground.from_profile(round_profile, n=n)
        inner = slice(n // 8, -n // 8)
        errs.append(np.max(np.abs(bg.laplacian(np.cos(bg.r)) + 2 * np.cos(bg.r))[inner]))
    assert errs[1] < errs[0] / 3.5 and errs[2] < errs[1] / 3.5


def test_round_stationary(round_bg):
    diags, st = run(round_bg, FlowState.zero(round_bg), 100 * round_bg.dt_max, diag_every=50)
    assert np.max(np.abs(st.u)) <= 1e-13
    assert all(abs(d.Rmax - 2) <= 1e-12 and abs(d.Rmin - 2) <= 1e-12 for d in diags)
    assert diags[-1].area == pytest.approx(diags[0].area, rel=1e-13)
    assert diags[0].area == pytest.approx(4 * math.pi, rel=1e-6)


def test_stability_guard(round_bg):
    st = FlowState.zero(round_bg)
    with pytest.raises(StabilityError):
        step(round_bg, st, 1.01 * C_CFL * round_bg.h ** 2)
    with pytest.raises(StabilityError):
        run(round_bg, st, 1.0, dt=1.0)
    step(round_bg, st, round_bg.dt_max)


def test_input_guards(round_bg, round_profile):
    with pytest.raises(DomainError):
        FlowBackground.from_profile(round_profile, n=4)
    with pytest.raises(DomainError):
        flow_rhs(round_bg, FlowState(0.0, np.zeros(3), np.zeros(3)))
    with pytest.raises(DomainError):
        run(round_bg, FlowState.zero(round_bg), 0.0)
    with pytest.raises(DomainError):
        step(round_bg, FlowState.zero(round_bg), -1e-6)


def test_frozen_metric_heat_limit(round_profile):
    bg = FlowBackground.from_profile(round_profile, n=32)
    # smooth data: RK4 resolves the low modes, high modes would carry dt^4 error
    f0 = 1e-2 * (np.cos(bg.r) + 0.5 * np.cos(3 * bg.r))
    t = 0.05
    _, st = run(bg, FlowState(0.0, np.zeros(bg.n), f0), t, residuals=False, frozen_metric=True)
    ref = expm(0.5 * t * bg.laplacian_matrix()) @ f0 + 0.5 * t
    assert np.max(np.abs(st.f1 - ref)) <= 1e-10
    assert np.all(st.u == 0)


def _bump(r, L, shape):
    if shape == "cos2":
        return 1e-2 * np.cos(2 * math.pi * r / L)
    if shape == "cos1":
        return 1e-2 * np.cos(math.pi * r / L)
    return 1e-2 * np.exp(-((r - 0.4 * L) / 0.1) ** 2)


@pytest.mark.parametrize("shape", ["cos2", "cos1", "bump"])
def test_round_perturbation_decays(round_bg, shape):
    u0 = _bump(round_bg.r, math.pi, shape)
    u0 -= np.sum(round_bg.vol * u0) / np.sum(round_bg.vol)
    diags, _ = run(round_bg, FlowState(0.0, u0, np.zeros(round_bg.n)), 0.05, diag_every=100,
                   residuals=False)
    sups = np.array([d.du_sup for d in diags])
    assert np.all(np.diff(sups) < 0)


@pytest.mark.parametrize("shape", ["cos2", "bump"])
def test_soliton_perturbation_decays(bg15, shape):
    # distance to the unperturbed evolution, which itself moves by a diffeomorphism
    u0 = _bump(bg15.r, bg15.r[-1], shape)
    a = FlowState(0.0, u0, np.zeros(bg15.n))
    b = FlowState.zero(bg15)
    chern0 = diagnose(bg15, a, residuals=False).chern
    dist = [np.max(np.abs(a.u - b.u))]
    dt = bg15.dt_max
    for k in range(1, 1601):
        a, b = step(bg15, a, dt), step(bg15, b, dt)
        if k % 200 == 0:
            dist.append(np.max(np.abs(a.u - b.u)))
    assert np.all(np.diff(dist) < 0)
    assert diagnose(bg15, a, residuals=False).chern == pytest.approx(chern0, rel=1e-12)


def test_soliton_nearly_steady(bg15, profile15):
    st0 = FlowState.zero(bg15)
    d0 = diagnose(bg15, st0)
    assert d0.res1 <= 1e-2 and d0.res2 <= 1e-6
    # a steady soliton moves by a diffeomorphism: du is not zero, its integral is
    du, _ = flow_rhs(bg15, st0)
    assert abs(np.sum(bg15.vol * du)) <= 1e-4
    diags, _ = run(bg15, st0, 0.01, diag_every=1000, residuals=False)
    assert diags[-1].area == pytest.approx(d0.area, rel=1e-6)
    assert diags[-1].Rmax == pytest.approx(d0.Rmax, abs=1e-4)
    assert diags[-1].chern == pytest.approx(d0.chern, rel=1e-13)
