"""Dormand-Prince 5(4) stepper for small autonomous systems.

Plain-float implementation: the reduced systems have three components, so
per-step numpy overhead would dominate. Steps can be clipped to land exactly
on requested output points, which keeps resampled values free of
interpolation error (finite differences of the samples stay clean).
"""
from __future__ import annotations

import bisect
import math

from .errors import StepUnderflow

C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
# 5th-order weights minus embedded 4th-order weights (7th stage is FSAL)
E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension, row i gives the theta-polynomial multiplying stage i
P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


def _axpy(y, h, coeffs, ks):
    out = list(y)
    for c, k in zip(coeffs, ks):
        if c:
            hc = h * c
            for j in range(len(out)):
                out[j] += hc * k[j]
    return out


def rk_step(f, y, fy, h):
    """One Dormand-Prince step. Returns ``(y_new, f_new, stages, err_vec)``."""
    ks = [fy]
    for i in range(1, 6):
        ks.append(f(_axpy(y, h, A[i], ks)))
    y_new = _axpy(y, h, B, ks)
    f_new = f(y_new)
    ks.append(f_new)
    err = [h * sum(E[i] * ks[i][j] for i in range(7)) for j in range(len(y))]
    return y_new, f_new, ks, err


def _err_norm(err, y, y_new, rtol, atol):
    total = 0.0
    for e, a, b in zip(err, y, y_new):
        sc = atol + rtol * max(abs(a), abs(b))
        total += (e / sc) ** 2
    return math.sqrt(total / len(err))


def initial_step(f, y, fy, rtol, atol, h_max):
    # Hairer, Norsett & Wanner starting-step heuristic
    sc = [atol + rtol * abs(v) for v in y]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y, sc)) / len(y))
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(fy, sc)) / len(y))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    y1 = [v + h0 * d for v, d in zip(y, fy)]
    f1 = f(y1)
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, fy, sc)) / len(y)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, h_max)


class Segment:
    """Dense output on one accepted step."""

    __slots__ = ("t0", "h", "y0", "ks")

    def __init__(self, t0, h, y0, ks):
        self.t0, self.h, self.y0, self.ks = t0, h, y0, ks

    def __call__(self, t):
        th = (t - self.t0) / self.h
        powers = (th, th * th, th ** 3, th ** 4)
        coeffs = [sum(P[i][j] * powers[j] for j in range(4)) for i in range(7)]
        return _axpy(self.y0, self.h, coeffs, self.ks)


class DenseSolution:
    """Piecewise dense output over a sequence of accepted steps."""

    def __init__(self, segments):
        self.segments = list(segments)
        self._starts = [s.t0 for s in self.segments]

    @property
    def t_min(self):
        return self.segments[0].t0

    @property
    def t_max(self):
        last = self.segments[-1]
        return last.t0 + last.h

    def __call__(self, t):
        i = bisect.bisect_right(self._starts, t) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        return self.segments[i](t)


class Stepper:
    """Adaptive stepping with optional stop points and a step-size floor."""

    def __init__(self, f, y0, rtol, atol, h_max=math.inf, h_min=0.0, t0=0.0):
        self.f = f
        self.t = t0
        self.y = list(y0)
        self.fy = f(self.y)
        self.rtol, self.atol = rtol, atol
        self.h_max, self.h_min = h_max, h_min
        self.h = initial_step(f, self.y, self.fy, rtol, atol, h_max)
        self.last_segment = None

    def step(self, t_stop=math.inf):
        """Advance one accepted step, never passing ``t_stop``."""
        h = min(self.h, self.h_max)
        clipped = False
        if self.t + h >= t_stop:
            h = t_stop - self.t
            clipped = True
        while True:
            if h < self.h_min or self.t + h == self.t:
                raise StepUnderflow(f"step size {h:.3e} underflow at r={self.t:.17g}")
            y_new, f_new, ks, err = rk_step(self.f, self.y, self.fy, h)
            en = _err_norm(err, self.y, y_new, self.rtol, self.atol)
            if en <= 1.0 and all(math.isfinite(v) for v in y_new):
                break
            if not math.isfinite(en):
                h *= MIN_FACTOR
            else:
                h *= max(MIN_FACTOR, SAFETY * en ** -0.2)
            clipped = False
        self.last_segment = Segment(self.t, h, self.y, ks)
        factor = MAX_FACTOR if en == 0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
        if not clipped or factor < 1.0:
            # a clipped step says nothing about the natural step size
            self.h = h * factor
        self.t = t_stop if clipped else self.t + h
        self.y, self.fy = y_new, f_new
        return self.t, self.y

    def exact_step(self, t_target):
        """Single untested step from the current state to ``t_target``."""
        y_new, _, _, _ = rk_step(self.f, self.y, self.fy, t_target - self.t)
        return y_new
