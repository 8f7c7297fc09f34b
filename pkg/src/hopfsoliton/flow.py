"""Reduced pluriclosed flow for rotationally symmetric transverse data.

The transverse metric is ``g = exp(2u) g0`` over a fixed background
``g0 = dr^2 + phi0^2 dtheta^2`` and the connection curvature density is
``tau = exp(-2u) (psi0 + Lap0 f1)``. The evolution is

    du/dt  = -(R - 2 tau^2) / 4,   R = exp(-2u) (R0 - 2 Lap0 u)
    df1/dt = tau / 2

Space is discretized by finite volumes on the cells around uniform nodes,
so the Laplacian is conservative (zero end fluxes give the Neumann
condition at both cone points) and the Chern number telescopes exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import DomainError, StabilityError
from .geometry import SolitonProfile, profile_from_samples, verify_soliton

__all__ = ["FlowBackground", "FlowState", "Diagnostics", "flow_rhs", "step", "run", "diagnose", "C_CFL"]

C_CFL = 0.2
_GAUSS = leggauss(8)


@dataclass
class FlowBackground:
    profile: SolitonProfile
    r: np.ndarray
    faces: np.ndarray
    phi_faces: np.ndarray
    vol: np.ndarray
    phi0: np.ndarray
    psi0: np.ndarray
    R0: np.ndarray

    @property
    def n(self) -> int:
        return int(self.r.size)

    @property
    def h(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def dt_max(self) -> float:
        return C_CFL * self.h ** 2

    @classmethod
    def from_profile(cls, profile: SolitonProfile, n: int = 512) -> "FlowBackground":
        if n < 8:
            raise DomainError(f"flow grid needs at least 8 nodes, got {n}")
        phi_s = CubicHermiteSpline(profile.r, profile.phi, profile.dphi)
        dpsi = profile.A * profile.phi * profile.psi
        psi_s = CubicHermiteSpline(profile.r, profile.psi, dpsi)
        R_s = CubicSpline(profile.r, profile.R)
        r = np.linspace(0.0, profile.L, n)
        h = r[1] - r[0]
        faces = np.concatenate(([0.0], 0.5 * (r[1:] + r[:-1]), [profile.L]))
        # cell integrals of phi0 by Gauss-Legendre on the Hermite interpolant
        xg, wg = _GAUSS
        lo, hi = faces[:-1], faces[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        vol = (phi_s(mid[:, None] + half[:, None] * xg[None, :]) * wg[None, :]).sum(axis=1) * half
        phi_faces = phi_s(faces[1:-1])
        phi0 = phi_s(r)
        phi0[0] = phi0[-1] = 0.0
        return cls(profile, r, faces, phi_faces, vol, phi0, psi_s(r), R_s(r))

    def laplacian(self, v: np.ndarray) -> np.ndarray:
        flux = np.zeros(self.n + 1)
        flux[1:-1] = self.phi_faces * np.diff(v) / self.h
        return np.diff(flux) / self.vol

    def laplacian_matrix(self) -> np.ndarray:
        return np.column_stack([self.laplacian(e) for e in np.eye(self.n)])


@dataclass
class FlowState:
    t: float
    u: np.ndarray
    f1: np.ndarray

    @classmethod
    def zero(cls, bg: FlowBackground) -> "FlowState":
        return cls(0.0, np.zeros(bg.n), np.zeros(bg.n))


@dataclass
class Diagnostics:
    t: float
    area: float
    chern: float
    Rmin: float
    Rmax: float
    tau_min: float
    tau_max: float
    res1: float
    res2: float
    res3: float
    du_sup: float


def _fields(bg: FlowBackground, u, f1):
    e2 = np.exp(-2.0 * u)
    R = e2 * (bg.R0 - 2.0 * bg.laplacian(u))
    tau = e2 * (bg.psi0 + bg.laplacian(f1))
    return R, tau


def flow_rhs(bg: FlowBackground, st: FlowState, frozen_metric: bool = False):
    """``(du, df1)`` at the current state; ``frozen_metric`` pins ``u``."""
    if st.u.shape != bg.r.shape or st.f1.shape != bg.r.shape:
        raise DomainError("state does not match the background grid")
    R, tau = _fields(bg, st.u, st.f1)
    du = np.zeros_like(st.u) if frozen_metric else -0.25 * (R - 2.0 * tau ** 2)
    return du, 0.5 * tau


def step(bg: FlowBackground, st: FlowState, dt: float, frozen_metric: bool = False) -> FlowState:
    """One classical RK4 step; ``dt`` must respect ``C_CFL * h^2``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if dt > bg.dt_max * (1 + 1e-12):
        raise StabilityError(f"dt={dt:.3e} exceeds the explicit bound {bg.dt_max:.3e}")

    def f(u, f1):
        return flow_rhs(bg, FlowState(st.t, u, f1), frozen_metric)

    u, g = st.u, st.f1
    k1 = f(u, g)
    k2 = f(u + 0.5 * dt * k1[0], g + 0.5 * dt * k1[1])
    k3 = f(u + 0.5 * dt * k2[0], g + 0.5 * dt * k2[1])
    k4 = f(u + dt * k3[0], g + dt * k3[1])
    u_new = u + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    g_new = g + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return FlowState(st.t + dt, u_new, g_new)


def diagnose(bg: FlowBackground, st: FlowState, residuals: bool = True) -> Diagnostics:
    """Scalar diagnostics of the current metric and connection.

    Residuals come from the soliton check applied to the instantaneous
    profile in its own arclength, with ``A`` taken from the background.
    """
    R, tau = _fields(bg, st.u, st.f1)
    du, _ = flow_rhs(bg, st)
    area = 2.0 * math.pi * float(np.sum(bg.vol * np.exp(2.0 * st.u)))
    chern = 2.0 * math.pi * float(np.sum(bg.vol * (bg.psi0 + bg.laplacian(st.f1))))
    res = (math.nan,) * 3
    if residuals:
        eu = np.exp(st.u)
        s = np.concatenate(([0.0], np.cumsum(0.5 * bg.h * (eu[1:] + eu[:-1]))))
        prof = profile_from_samples(s, eu * bg.phi0, tau, bg.profile.A, bg.profile.params)
        rep = verify_soliton(prof, tol=math.inf)
        res = (rep.res1, rep.res2, rep.res3)
    return Diagnostics(
        st.t, area, chern, float(R.min()), float(R.max()), float(tau.min()), float(tau.max()),
        *res, float(np.max(np.abs(du))),
    )


def run(
    bg: FlowBackground,
    st0: FlowState,
    t_end: float,
    diag_every: int = 100,
    dt: Optional[float] = None,
    frozen_metric: bool = False,
    residuals: bool = True,
):
    """Integrate to ``t_end`` and return ``(diagnostics, final_state)``.

    The step is the largest admissible one that lands exactly on ``t_end``
    unless ``dt`` is given. Diagnostics are recorded at the start, every
    ``diag_every`` steps and at the end.
    """
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end!r}")
    if diag_every < 1:
        raise DomainError("diag_every must be at least 1")
    if dt is None:
        n_steps = max(1, math.ceil(t_end / bg.dt_max))
        dt = t_end / n_steps
    else:
        if dt > bg.dt_max * (1 + 1e-12):
            raise StabilityError(f"dt={dt:.3e} exceeds the explicit bound {bg.dt_max:.3e}")
        n_steps = max(1, round(t_end / dt))
    st = FlowState(st0.t, st0.u.copy(), st0.f1.copy())
    out: List[Diagnostics] = [diagnose(bg, st, residuals)]
    for k in range(1, n_steps + 1):
        st = step(bg, st, dt, frozen_metric)
        if k % diag_every == 0 or k == n_steps:
            out.append(diagnose(bg, st, residuals))
    return out, st
