"""Soliton data on the transverse orbifold and its verification.

A profile describes the rotationally symmetric transverse metric
``dr^2 + phi(r)^2 dtheta^2`` on ``[0, L]`` together with the curvature
density ``psi`` of the connection and the soliton potential ``f``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .errors import BoundaryMismatch, DomainError, NonPositivePhi
from .ode import SOLITON, Trajectory
from .params import HopfParams, derive

__all__ = [
    "SolitonProfile",
    "ResidualReport",
    "reconstruct",
    "hopf_fixed_point",
    "profile_from_samples",
    "verify_soliton",
    "gauss_bonnet",
    "chern_integral",
    "cone_angles",
    "cumulative_integral",
]


@dataclass
class SolitonProfile:
    r: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    psi: np.ndarray
    gamma: np.ndarray
    f: np.ndarray
    lam: float
    A: float
    L: float
    R: np.ndarray
    F2: np.ndarray
    params: HopfParams
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    z0: Optional[float] = None
    T: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def n(self) -> int:
        return int(self.r.size)

    @property
    def round(self) -> bool:
        return self.A == 0


@dataclass
class ResidualReport:
    res1: float
    res2: float
    res3: float
    curvature_fd: float
    tol: float

    @property
    def passed(self) -> bool:
        vals = (self.res1, self.res2, self.res3, self.curvature_fd)
        return all(math.isfinite(v) and v <= self.tol for v in vals)

    def rows(self):
        return [
            ("res1  A phi_r - phi_rr/phi - psi^2", self.res1),
            ("res2  psi_r - A phi psi", self.res2),
            ("res3  rel. spread of exp(-f) psi", self.res3),
            ("phi_rr finite-difference vs identity", self.curvature_fd),
        ]

    def __str__(self):
        lines = [f"{name:<40s} {val:12.3e}  {'ok' if val <= self.tol else 'FAIL'}" for name, val in self.rows()]
        lines.append(f"{'tolerance':<40s} {self.tol:12.3e}  {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def cumulative_integral(values, h, deriv=None):
    """Running integral from the left end on a uniform grid.

    Composite trapezoid, plus the Euler-Maclaurin end correction
    ``-h^2/12 (v'(r_k) - v'(0))`` when the derivative is known, which makes
    it fourth-order accurate.
    """
    v = np.asarray(values, dtype=float)
    out = np.zeros_like(v)
    out[1:] = np.cumsum(0.5 * h * (v[1:] + v[:-1]))
    if deriv is not None:
        d = np.asarray(deriv, dtype=float)
        out -= h * h / 12.0 * (d - d[0])
    return out


def _check_uniform(r):
    dr = np.diff(r)
    if r.size < 16:
        raise DomainError(f"need at least 16 grid points, got {r.size}")
    if np.any(dr <= 0) or np.ptp(dr) > 1e-9 * dr.mean():
        raise DomainError("grid must be uniform and strictly increasing")


def reconstruct(traj: Trajectory, params: HopfParams, *, check_system: bool = True) -> SolitonProfile:
    """Soliton data from a trajectory already rescaled to the Hopf slopes.

    With ``A = 1``: ``phi = x``, ``phi_r = y``, ``psi = z``, ``gamma = psi phi``,
    ``f = int phi`` from ``f(0) = 0`` and ``lam`` the mean of ``exp(-f) psi``.
    Only trajectories of :data:`~hopfsoliton.ode.SOLITON` reconstruct to
    soliton data; ``check_system=False`` lets other systems through so their
    failure can be measured.
    """
    if check_system and traj.system is not SOLITON:
        raise DomainError(
            f"trajectory of the {traj.system.name!r} system does not encode soliton data; "
            "integrate with system=SOLITON"
        )
    if traj.T is None:
        raise BoundaryMismatch("trajectory has no return time")
    r = np.asarray(traj.r, dtype=float)
    _check_uniform(r)
    if abs(traj.y0 * params.a - 1.0) > 1e-8:
        raise BoundaryMismatch(
            f"initial slope {traj.y0!r} is not 1/a = {1 / params.a!r}; rescale first"
        )
    phi, dphi, psi = traj.x.copy(), traj.y.copy(), traj.z.copy()
    if np.any(phi[1:-1] <= 0):
        raise NonPositivePhi("phi must be positive in the interior")
    h = r[1] - r[0]
    A = 1.0
    f = cumulative_integral(A * phi, h, A * dphi)
    lam = float(np.mean(np.exp(-f) * psi))
    if traj.system is SOLITON:
        # phi_rr / phi = A phi_r - psi^2, regular at the cone points
        R = 2.0 * (psi ** 2 - A * dphi)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            R = -2.0 * traj.system.dy(phi, dphi, psi) / phi
    return SolitonProfile(
        r=r, phi=phi, dphi=dphi, psi=psi, gamma=psi * phi, f=f, lam=lam, A=A, L=float(r[-1]),
        R=R, F2=2.0 * psi ** 2, params=params, x=traj.x.copy(), y=traj.y.copy(), z=traj.z.copy(),
        z0=traj.z0, T=traj.T, meta={"system": traj.system.name},
    )


def hopf_fixed_point(n_grid: int = 2048, params: Optional[HopfParams] = None) -> SolitonProfile:
    """Closed-form ``A = 0`` profile: the round sphere ``phi = sin r`` on ``[0, pi]``."""
    if n_grid < 16:
        raise DomainError(f"n_grid must be at least 16, got {n_grid}")
    if params is None:
        params = derive(math.exp(-2.0), math.exp(-2.0))
    elif not params.diagonal:
        raise DomainError("the round profile needs alpha_mod == beta_mod")
    r = np.linspace(0.0, math.pi, n_grid)
    phi = np.sin(r)
    dphi = np.cos(r)
    # mirror so that phi(L - r) = phi(r) holds bit for bit
    half = n_grid // 2
    phi[n_grid - half:] = phi[:half][::-1]
    dphi[n_grid - half:] = -dphi[:half][::-1]
    if n_grid % 2:
        dphi[half] = 0.0
    ones = np.ones_like(r)
    return SolitonProfile(
        r=r, phi=phi, dphi=dphi, psi=ones.copy(), gamma=phi.copy(), f=np.zeros_like(r), lam=1.0,
        A=0.0, L=math.pi, R=2.0 * ones, F2=2.0 * ones, params=params, x=phi.copy(), y=dphi.copy(),
        z=ones.copy(), z0=None, T=math.pi, meta={"system": "round"},
    )


def profile_from_samples(s, phi, psi, A, params, n_grid=None) -> SolitonProfile:
    """Profile on a uniform arclength grid from samples on an arbitrary grid.

    Derivatives come from cubic splines, so residuals of the result are only
    as accurate as the input sampling.
    """
    s = np.asarray(s, dtype=float)
    n_grid = n_grid or s.size
    sp_phi = CubicSpline(s, phi)
    sp_psi = CubicSpline(s, psi)
    r = np.linspace(s[0], s[-1], n_grid)
    ph = sp_phi(r)
    dph = sp_phi(r, 1)
    ps = sp_psi(r)
    R = np.empty_like(r)
    R[1:-1] = -2.0 * sp_phi(r[1:-1], 2) / ph[1:-1]
    R[0], R[-1] = 2 * R[1] - R[2], 2 * R[-2] - R[-3]
    h = r[1] - r[0]
    f = cumulative_integral(A * ph, h, A * dph)
    lam = float(np.mean(np.exp(-f) * ps))
    return SolitonProfile(
        r=r - r[0], phi=ph, dphi=dph, psi=ps, gamma=ps * ph, f=f, lam=lam, A=A, L=float(r[-1] - r[0]),
        R=R, F2=2.0 * ps ** 2, params=params, x=A * ph, y=A * dph, z=ps,
    )


def _d1(v, h, lo, hi):
    """Fourth-order central first derivative at indices ``lo..hi-1``."""
    i = np.arange(lo, hi)
    return (-v[i + 2] + 8 * v[i + 1] - 8 * v[i - 1] + v[i - 2]) / (12.0 * h)


def verify_soliton(profile: SolitonProfile, tol: float = 1e-6, margin: int = 4) -> ResidualReport:
    """Sup-norm residuals of the reduced soliton equations on the interior.

    ``res1`` takes ``phi_rr / phi = -R/2`` from the stored curvature. The
    stored ``phi_r`` is differentiated independently (fourth-order central
    differences) and compared with ``-R phi / 2``; ``psi_r`` in ``res2`` is
    also a finite difference. ``margin`` grid cells at each cone point are
    skipped because ``phi_rr/phi`` is 0/0 there.
    """
    margin = max(int(margin), 2)
    n = profile.n
    if n < 2 * margin + 3:
        raise DomainError("grid too small for the residual margin")
    h = profile.h
    lo, hi = margin, n - margin
    sl = slice(lo, hi)
    A = profile.A
    phi, dphi, psi, R = profile.phi[sl], profile.dphi[sl], profile.psi[sl], profile.R[sl]
    res1 = np.max(np.abs(A * dphi + 0.5 * R - psi ** 2))
    phi_rr = _d1(profile.dphi, h, lo, hi)
    curv = np.max(np.abs(phi_rr + 0.5 * R * phi))
    psi_r = _d1(profile.psi, h, lo, hi)
    res2 = np.max(np.abs(psi_r - A * phi * psi))
    g = np.exp(-profile.f[sl]) * psi
    res3 = np.max(np.abs(g - profile.lam)) / abs(profile.lam)
    return ResidualReport(float(res1), float(res2), float(res3), float(curv), float(tol))


def gauss_bonnet(profile: SolitonProfile):
    """``(numeric, analytic)`` total curvature.

    ``numeric = 2 pi int R phi dr`` by quadrature; ``analytic`` is the
    integrated-by-parts value ``4 pi (phi'(0) - phi'(L))``, i.e.
    ``4 pi (1/a + 1/b)`` for a reconstructed profile.
    """
    numeric = 2.0 * math.pi * simpson(profile.R * profile.phi, dx=profile.h)
    analytic = 4.0 * math.pi * (profile.dphi[0] - profile.dphi[-1])
    return float(numeric), float(analytic)


def chern_integral(profile: SolitonProfile) -> float:
    """Total transverse curvature of the connection, ``2 pi int gamma dr``."""
    return float(2.0 * math.pi * simpson(profile.gamma, dx=profile.h))


def cone_angles(profile: SolitonProfile):
    """Cone angles ``(2 pi phi'(0), -2 pi phi'(L))`` at the two ends."""
    return 2.0 * math.pi * float(profile.dphi[0]), -2.0 * math.pi * float(profile.dphi[-1])
