"""Reduced soliton ODE: integration, return-time events and diagnostics.

Two reduced systems share the variables ``x = A*phi`` and ``y = A*phi_r``:

``REDUCED``
    ``x' = y, y' = x*y - z**2, z' = x*z`` with ``z = sqrt(A)*psi``. This is
    the system the shooting analysis (growth, control and decay phases) is
    phrased in, and the default for this module.

``SOLITON``
    ``x' = y, y' = x*(y - z**2), z' = x*z`` with ``z = psi``. Substituting
    ``f_r = A*phi`` into the rotationally symmetric soliton equations
    ``0 = A*phi_r - phi_rr/phi - psi**2`` and ``psi_r = A*phi*psi`` gives this
    system; only its solutions reconstruct to soliton data (see
    :mod:`hopfsoliton.geometry`).

Both are invariant under ``r -> r/c`` with ``x -> c x, y -> c**2 y`` and
``z -> c**w z`` where ``w = z_weight`` (3/2 and 1 respectively).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._dopri import DenseSolution, Stepper, rk_step
from .errors import DomainError, HorizonExceeded, MissingEvent

__all__ = [
    "ReducedSystem",
    "REDUCED",
    "SOLITON",
    "SYSTEMS",
    "OdeState",
    "ToleranceSettings",
    "PhaseMarks",
    "Trajectory",
    "rhs",
    "integrate",
    "lyapunov",
    "first_integrals",
    "classify_phases",
    "scaling_transform",
    "identity_defects",
]


@dataclass(frozen=True)
class ReducedSystem:
    name: str
    z_weight: float
    dy: Callable[[float, float, float], float] = field(repr=False)
    # d/dr (y/z) as a function of (x, z)
    quotient_rate: Callable[[float, float], float] = field(repr=False)
    # two independent first integrals (x, y, z) -> (I1, I2)
    integrals: Callable = field(repr=False)

    def rhs(self, x, y, z):
        return y, self.dy(x, y, z), x * z


REDUCED = ReducedSystem(
    name="reduced",
    z_weight=1.5,
    dy=lambda x, y, z: x * y - z * z,
    quotient_rate=lambda x, z: -z,
    integrals=lambda x, y, z: (
        (y * y + 2 * x * z * z) / (z * z),
        (y ** 3 + 3 * x * y * z * z + 3 * z ** 4) / z ** 3,
    ),
)

SOLITON = ReducedSystem(
    name="soliton",
    z_weight=1.0,
    dy=lambda x, y, z: x * (y - z * z),
    quotient_rate=lambda x, z: -x * z,
    integrals=lambda x, y, z: (x * x - 2 * y - z * z, (y + z * z) / z),
)

SYSTEMS = {s.name: s for s in (REDUCED, SOLITON)}


class OdeState(NamedTuple):
    r: float
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class ToleranceSettings:
    rtol: float = 1e-10
    atol: float = 1e-10
    event_tol: float = 1e-12
    horizon: Optional[float] = None
    min_step: float = 1e-14
    max_step: float = math.inf
    n_samples: int = 2048

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.event_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.horizon is not None and not self.horizon > 0:
            raise DomainError("horizon must be positive")

    def horizon_for(self, z0: float) -> float:
        if self.horizon is not None:
            return self.horizon
        return 1e4 + (10.0 / (z0 * z0) if z0 > 0 else 0.0)


@dataclass(frozen=True)
class PhaseMarks:
    t1: Optional[float] = None
    t2: Optional[float] = None
    t3: Optional[float] = None


class _ScaledDense:
    def __init__(self, base, c, w):
        self.base, self.c, self.w = base, c, w

    def __call__(self, r):
        x, y, z = self.base(self.c * r)
        c = self.c
        return [c * x, c * c * y, c ** self.w * z]


@dataclass
class Trajectory:
    """Solution of a reduced system started at ``(0, y0, z0)``.

    ``r, x, y, z`` hold uniform samples on ``[0, T]`` (or step endpoints when
    resampling is disabled). ``dense`` evaluates the continuous solution.
    """

    r: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    z0: float
    y0: float
    T: Optional[float]
    terminal_y: Optional[float]
    system: ReducedSystem
    dense: Callable = field(repr=False)
    phase_marks: PhaseMarks = field(default_factory=PhaseMarks)
    n_steps: int = 0

    @property
    def samples(self):
        return [OdeState(*row) for row in zip(self.r, self.x, self.y, self.z)]

    def state_at(self, r: float) -> np.ndarray:
        return np.asarray(self.dense(r), dtype=float)


def rhs(state, system: ReducedSystem = REDUCED):
    """Right-hand side at ``state`` given as ``(x, y, z)`` or an :class:`OdeState`."""
    if isinstance(state, OdeState):
        x, y, z = state.x, state.y, state.z
    else:
        x, y, z = state
    return system.rhs(x, y, z)


def _bisect(g, lo, hi, tol):
    """Root of ``g`` in ``[lo, hi]`` given ``g(lo) > 0 >= g(hi)``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def integrate(
    z0: float,
    ctrl: Optional[ToleranceSettings] = None,
    *,
    y0: float = 1.0,
    system: ReducedSystem = REDUCED,
) -> Trajectory:
    """Integrate from ``(x, y, z) = (0, y0, z0)`` until x returns to zero.

    The return time ``T`` is located by bisection on the dense output to
    ``ctrl.event_tol``; the terminal state comes from a true step landing on
    ``T``. With ``ctrl.n_samples >= 2`` the solution is recomputed with steps
    clipped to a uniform grid on ``[0, T]``.

    Raises :class:`HorizonExceeded` (partial trajectory attached) when no
    return happens before the horizon, and :class:`StepUnderflow` on blow-up.
    """
    ctrl = ctrl or ToleranceSettings()
    z0 = float(z0)
    if not z0 >= 0 or not math.isfinite(z0):
        raise DomainError(f"z0 must be non-negative and finite, got {z0!r}")
    if not y0 > 0:
        raise DomainError(f"y0 must be positive, got {y0!r}")

    def f(s):
        return list(system.rhs(s[0], s[1], s[2]))

    horizon = ctrl.horizon_for(z0)
    r_ignore = 10.0 * ctrl.event_tol
    st = Stepper(f, [0.0, y0, z0], ctrl.rtol, ctrl.atol, h_max=ctrl.max_step, h_min=ctrl.min_step)
    segments = []
    T = None
    while True:
        t_old, s_old, f_old = st.t, st.y, st.fy
        if t_old >= horizon:
            break
        t_new, s_new = st.step(t_stop=horizon)
        seg = st.last_segment
        segments.append(seg)
        if t_new > r_ignore and s_new[0] < 0.0 <= s_old[0]:
            lo = max(t_old, r_ignore)
            if lo > t_old and seg(lo)[0] <= 0.0:
                lo = t_old
            T = _bisect(lambda t: seg(t)[0], lo, t_new, ctrl.event_tol)
            s_T, _, _, _ = rk_step(f, s_old, f_old, T - t_old)
            # Newton polish on true steps removes the interpolant's bias
            for _ in range(4):
                if s_T[1] == 0.0:
                    break
                T_next = T - s_T[0] / s_T[1]
                if not t_old < T_next <= t_new or T_next == T:
                    break
                T = T_next
                s_T, _, _, _ = rk_step(f, s_old, f_old, T - t_old)
            break

    dense = DenseSolution(segments)
    if T is None:
        ends = [segments[0].t0] + [s.t0 + s.h for s in segments]
        pts = np.array([[0.0, y0, z0]] + [dense(t) for t in ends[1:]])
        partial = Trajectory(
            np.array(ends), pts[:, 0], pts[:, 1], pts[:, 2], z0, y0, None, None, system,
            dense, PhaseMarks(), len(segments),
        )
        raise HorizonExceeded(
            f"x did not return to 0 before r={horizon:.6g} (z0={z0!r})", trajectory=partial
        )

    if ctrl.n_samples >= 2:
        grid = np.linspace(0.0, T, ctrl.n_samples)
        pts = np.empty((grid.size, 3))
        pts[0] = (0.0, y0, z0)
        st2 = Stepper(f, [0.0, y0, z0], ctrl.rtol, ctrl.atol, h_max=ctrl.max_step, h_min=ctrl.min_step)
        for k in range(1, grid.size):
            while st2.t < grid[k]:
                st2.step(t_stop=grid[k])
            pts[k] = st2.y
        # the located event state is authoritative at r = T
        pts[-1] = s_T
        r = grid
    else:
        ends = [s.t0 for s in segments] + [T]
        r = np.array(ends)
        pts = np.array([[0.0, y0, z0]] + [dense(t) for t in ends[1:-1]] + [s_T])

    traj = Trajectory(
        r, pts[:, 0].copy(), pts[:, 1].copy(), pts[:, 2].copy(), z0, y0, T, s_T[1], system,
        dense, PhaseMarks(t3=T), len(segments),
    )
    traj.phase_marks = classify_phases(traj, None, tol=ctrl.event_tol)
    return traj


def lyapunov(traj: Trajectory):
    """``E = y - x**2/2`` along the samples; nonincreasing while ``x >= 0``."""
    if traj.r.size == 0:
        raise DomainError("empty trajectory")
    return traj.r.copy(), traj.y - 0.5 * traj.x ** 2


def first_integrals(traj: Trajectory):
    """Both conserved quantities of the trajectory's system at every sample."""
    return traj.system.integrals(traj.x, traj.y, traj.z)


def classify_phases(traj: Trajectory, growth_threshold: Optional[float], tol: float = 1e-12) -> PhaseMarks:
    """Locate the growth, control and decay phase boundaries.

    ``t2`` is the first zero of y (the maximum of x), ``t1`` the first time x
    reaches ``growth_threshold`` (``None`` if x never gets there or no
    threshold is given) and ``t3 = T``.
    """
    if traj.T is None:
        raise MissingEvent("trajectory has no return time")
    t2 = None
    pos = traj.y > 0
    idx = np.flatnonzero(pos[:-1] & ~pos[1:])
    if idx.size:
        k = int(idx[0])
        t2 = _bisect(lambda t: traj.dense(t)[1], traj.r[k], traj.r[k + 1], tol)
    t1 = None
    if growth_threshold is not None and t2 is not None:
        lam = float(growth_threshold)
        if traj.dense(t2)[0] >= lam:
            if traj.x[0] >= lam:
                t1 = 0.0
            else:
                # x increases on [0, t2]
                t1 = _bisect(lambda t: lam - traj.dense(t)[0], 0.0, t2, tol)
    return PhaseMarks(t1=t1, t2=t2, t3=traj.T)


def scaling_transform(traj: Trajectory, c: float) -> Trajectory:
    """Apply ``r -> r/c``, ``(x, y, z) -> (c x, c**2 y, c**w z)``."""
    if not c > 0:
        raise DomainError(f"scale must be positive, got {c!r}")
    w = traj.system.z_weight
    cz = c ** w
    marks = traj.phase_marks

    def sc(t):
        return None if t is None else t / c

    return dataclasses.replace(
        traj,
        r=traj.r / c,
        x=c * traj.x,
        y=c * c * traj.y,
        z=cz * traj.z,
        z0=cz * traj.z0,
        y0=c * c * traj.y0,
        T=sc(traj.T),
        terminal_y=None if traj.terminal_y is None else c * c * traj.terminal_y,
        dense=_ScaledDense(traj.dense, c, w),
        phase_marks=PhaseMarks(sc(marks.t1), sc(marks.t2), sc(marks.t3)),
    )


def identity_defects(traj: Trajectory, order: int = 8) -> dict:
    """Sup-norm defects of the conservation and monotonicity identities.

    Integrals are taken over every accepted step of the dense output with
    Gauss-Legendre of the given order and compared at the step ends:

    ``quotient``  ``y/z - (y0/z0 + int d/dr(y/z))``, relative to ``max(1, |y/z|)``
    ``log_z``     ``ln z - ln z0 - int x``
    ``lyapunov``  largest increase of ``y - x^2/2`` between any two step ends
    ``min_z``     smallest ``z`` seen
    """
    if traj.T is None:
        raise MissingEvent("trajectory has no return time")
    segs = getattr(traj.dense, "segments", None)
    if segs is None:
        raise DomainError("identity checks need the unscaled dense output")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    sysm = traj.system
    q_int = lz_int = 0.0
    q0 = traj.y0 / traj.z0
    worst_q = worst_lz = worst_e = 0.0
    e_min = traj.y0
    min_z = traj.z0
    for seg in segs:
        lo, hi = seg.t0, min(seg.t0 + seg.h, traj.T)
        if hi <= lo:
            break
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = np.array([seg(mid + half * u) for u in nodes])
        q_int += half * float(np.dot(weights, sysm.quotient_rate(pts[:, 0], pts[:, 2])))
        lz_int += half * float(np.dot(weights, pts[:, 0]))
        x, y, z = seg(hi)
        min_z = min(min_z, z, float(pts[:, 2].min()))
        worst_q = max(worst_q, abs(y / z - (q0 + q_int)) / max(1.0, abs(y / z)))
        worst_lz = max(worst_lz, abs(math.log(z) - math.log(traj.z0) - lz_int))
        e = y - 0.5 * x * x
        worst_e = max(worst_e, e - e_min)
        e_min = min(e_min, e)
    return {"quotient": worst_q, "log_z": worst_lz, "lyapunov": worst_e, "min_z": min_z}
