"""Shooting on the initial curvature ``z0`` to hit a boundary-slope ratio.

A trajectory started at ``(0, 1, z0)`` returns to ``x = 0`` with slope
``y(T) < 0``. The ratio of the two boundary slopes is what the Hopf
parameters prescribe; :func:`solve_for_rho` finds a ``z0`` achieving a given
ratio and :func:`rescale_to_hopf` turns the trajectory into one with the
actual slopes ``1/a`` and ``-1/b``.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import BoundaryMismatch, ConvergenceError, DomainError, SolitonError, NoBracket
from .ode import REDUCED, ReducedSystem, ToleranceSettings, Trajectory, integrate, scaling_transform
from .params import HopfParams

__all__ = ["Shot", "ShootingResult", "shoot", "rho_of_z0", "solve_for_rho", "rescale_to_hopf", "scan_grid"]

log = logging.getLogger(__name__)

SCAN_RANGE = (1e-3, 1e3)
SCAN_POINTS = 121
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class Shot:
    z0: float
    T: float
    terminal_y: float
    # y(0)/|y(T)| as literally defined, and the orientation-free ratio >= 1
    rho_raw: float
    rho: float


@dataclass
class ShootingResult:
    z0: float
    rho_achieved: float
    rho_target: float
    bracket: Tuple[float, float]
    iterations: int
    trajectory: Trajectory
    scale_c: float
    rho_raw: float
    brackets: List[Tuple[float, float]] = field(default_factory=list)


def _shot_ctrl(ctrl: Optional[ToleranceSettings]) -> ToleranceSettings:
    ctrl = ctrl or ToleranceSettings()
    return dataclasses.replace(ctrl, n_samples=0)


def shoot(z0: float, ctrl: Optional[ToleranceSettings] = None, system: ReducedSystem = REDUCED) -> Shot:
    """Integrate one shot and report both forms of the slope ratio."""
    if not z0 > 0:
        raise DomainError(f"z0 must be positive, got {z0!r}")
    traj = integrate(z0, _shot_ctrl(ctrl), system=system)
    yT = abs(traj.terminal_y)
    ratio = traj.y0 / yT
    return Shot(z0, traj.T, traj.terminal_y, ratio, max(ratio, 1.0 / ratio))


def rho_of_z0(z0: float, ctrl: Optional[ToleranceSettings] = None, system: ReducedSystem = REDUCED) -> float:
    """Slope ratio ``max(|y(T)|, 1/|y(T)|)`` reached from ``(0, 1, z0)``."""
    return shoot(z0, ctrl, system).rho


def scan_grid(lo: float = SCAN_RANGE[0], hi: float = SCAN_RANGE[1], n: int = SCAN_POINTS) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def solve_for_rho(
    rho_target: float,
    tol: float = 1e-8,
    ctrl: Optional[ToleranceSettings] = None,
    *,
    system: ReducedSystem = REDUCED,
    params: Optional[HopfParams] = None,
    grid: Optional[np.ndarray] = None,
) -> ShootingResult:
    """Find ``z0`` with ``|rho_of_z0(z0) - rho_target| <= tol``.

    Scans a geometric grid for sign changes of ``rho_of_z0 - rho_target``,
    takes the bracket with the smallest ``z0`` and bisects in ``log z0``.
    Nothing is assumed about monotonicity of ``rho_of_z0``. When ``params``
    is given the returned trajectory is rescaled to its boundary slopes,
    otherwise it starts at ``(0, 1, z0)``.
    """
    if not rho_target > 1:
        raise DomainError(f"rho_target must exceed 1, got {rho_target!r}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    ctrl = ctrl or ToleranceSettings()
    grid = scan_grid() if grid is None else np.asarray(grid, dtype=float)

    def resid(z):
        return shoot(z, ctrl, system).rho - rho_target

    values = np.full(grid.size, np.nan)
    for i, z in enumerate(grid):
        try:
            values[i] = resid(z)
        except SolitonError as exc:
            log.debug("scan point z0=%g failed: %s", z, exc)
    brackets = []
    for i in range(grid.size - 1):
        v0, v1 = values[i], values[i + 1]
        if np.isfinite(v0) and np.isfinite(v1) and np.sign(v0) != np.sign(v1):
            brackets.append((float(grid[i]), float(grid[i + 1])))
    if not brackets:
        raise NoBracket(
            f"no sign change of rho(z0) - {rho_target!r} on [{grid[0]:g}, {grid[-1]:g}]"
        )
    if len(brackets) > 1:
        log.info("rho=%g: %d brackets found, using the smallest z0", rho_target, len(brackets))

    z_lo, z_hi = brackets[0]
    f_lo = values[int(np.searchsorted(grid, z_lo))]
    z0 = None
    for it in range(1, MAX_BISECTIONS + 1):
        mid = math.sqrt(z_lo * z_hi)
        if not z_lo < mid < z_hi:
            break
        v = resid(mid)
        if abs(v) <= tol:
            z0 = mid
            break
        if np.sign(v) == np.sign(f_lo):
            z_lo, f_lo = mid, v
        else:
            z_hi = mid
    if z0 is None:
        raise ConvergenceError(
            f"bisection for rho={rho_target!r} stalled in [{z_lo!r}, {z_hi!r}] after {it} iterations"
        )

    traj = integrate(z0, ctrl, system=system)
    ratio = traj.y0 / abs(traj.terminal_y)
    scale_c = 1.0
    if params is not None:
        traj = rescale_to_hopf(traj, params, tol=max(10 * tol, 1e-9))
        scale_c = 1.0 / math.sqrt(params.a)
    return ShootingResult(
        z0=z0,
        rho_achieved=max(ratio, 1.0 / ratio),
        rho_target=rho_target,
        bracket=(z_lo, z_hi),
        iterations=it,
        trajectory=traj,
        scale_c=scale_c,
        rho_raw=ratio,
        brackets=brackets,
    )


def rescale_to_hopf(traj: Trajectory, params: HopfParams, tol: float = 1e-8) -> Trajectory:
    """Scale so the boundary slopes become ``(1/a, -1/b)``.

    The return slope is always the steeper one, so the ``a`` end (the
    smaller slope) sits at ``r = 0``.
    """
    if traj.T is None:
        raise BoundaryMismatch("trajectory has no return time")
    ratio = abs(traj.terminal_y) / traj.y0
    if abs(ratio - params.rho) > tol * params.rho:
        raise BoundaryMismatch(
            f"slope ratio {ratio!r} does not match a/b = {params.rho!r} (tol {tol:g})"
        )
    c = 1.0 / math.sqrt(params.a * traj.y0)
    return scaling_transform(traj, c)
