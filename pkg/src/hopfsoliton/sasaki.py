"""Polynomial vector fields for the Sasaki frame on C^2 minus the origin.

Coordinates are ``(x1, y1, x2, y2)`` with ``z_k = x_k + i y_k``. With the
rotation fields ``R_k = y_k d/dx_k - x_k d/dy_k`` and radial fields
``D_k = x_k d/dx_k + y_k d/dy_k`` the frame is

    W  = a D1 + b D2             Z  = -J W = a R1 + b R2
    E1 = |z2|^2 R1 - |z1|^2 R2   E2 = J E1 = |z2|^2 D1 - |z1|^2 D2

and the contact form is ``eta = (x1 dy1 - y1 dx1 + x2 dy2 - y2 dx2) / sigma``
with ``sigma = a |z1|^2 + b |z2|^2``. Here ``a, b > 0``; flipping the sign
of both in every formula leaves all the checks below unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from .errors import DomainError
from .params import HopfParams

__all__ = [
    "COORDS",
    "PolyVectorField",
    "standard_fields",
    "symbolic_fields",
    "bracket",
    "apply_J",
    "eta_eval",
    "sigma_eval",
    "check_unit_speed",
    "w_bracket_defect",
]

COORDS = sp.symbols("x1 y1 x2 y2", real=True)
A_SYM, B_SYM = sp.symbols("a b", positive=True)


@dataclass(frozen=True)
class PolyVectorField:
    """Vector field with polynomial components in :data:`COORDS`."""

    components: Tuple[sp.Poly, ...]
    name: str = ""
    _fn: Optional[object] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_exprs(cls, exprs: Sequence, name: str = "", domain=None) -> "PolyVectorField":
        kw = {} if domain is None else {"domain": domain}
        return cls(tuple(sp.Poly(sp.expand(e), *COORDS, **kw) for e in exprs), name)

    @property
    def jacobian(self):
        """Exact partials, ``jacobian[i][j] = d component_i / d coord_j``."""
        return tuple(tuple(c.diff(v) for v in COORDS) for c in self.components)

    @property
    def degree(self) -> int:
        return max(c.total_degree() for c in self.components)

    def is_zero(self, atol: float = 0.0) -> bool:
        """True when every coefficient vanishes (to ``atol`` for float coefficients)."""
        for c in self.components:
            for coeff in c.coeffs():
                if coeff == 0:
                    continue
                if not coeff.is_number or abs(complex(coeff)) > atol:
                    return False
        return True

    def max_coeff(self) -> float:
        vals = [abs(float(k)) for c in self.components for k in c.coeffs()]
        return max(vals, default=0.0)

    def subs(self, **values) -> "PolyVectorField":
        rep = {sp.Symbol(k, positive=True): v for k, v in values.items()}
        return PolyVectorField.from_exprs([c.as_expr().subs(rep) for c in self.components], self.name)

    def __call__(self, p) -> np.ndarray:
        """Evaluate at one point ``(4,)`` or many ``(n, 4)``; returns the same leading shape."""
        fn = self._fn
        if fn is None:
            fn = sp.lambdify(COORDS, [c.as_expr() for c in self.components], "numpy")
            object.__setattr__(self, "_fn", fn)
        p = np.asarray(p, dtype=float)
        cols = fn(*np.moveaxis(p, -1, 0))
        return np.stack([np.broadcast_to(np.asarray(c, dtype=float), p.shape[:-1]) for c in cols], axis=-1)

    def jacobian_at(self, p) -> np.ndarray:
        """Exact Jacobian at points ``(n, 4)``, shape ``(n, 4, 4)``."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        fn = sp.lambdify(COORDS, [[e.as_expr() for e in row] for row in self.jacobian], "numpy")
        vals = fn(*p.T)
        return np.stack([np.stack([np.broadcast_to(np.asarray(v, dtype=float), p.shape[:1]) for v in row], -1)
                         for row in vals], -2)

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField(tuple(a - b for a, b in zip(self.components, other.components)))


def _fields(a, b):
    x1, y1, x2, y2 = COORDS
    n1, n2 = x1 ** 2 + y1 ** 2, x2 ** 2 + y2 ** 2
    R1, R2 = (y1, -x1, 0, 0), (0, 0, y2, -x2)
    D1, D2 = (x1, y1, 0, 0), (0, 0, x2, y2)
    Z = [a * u + b * v for u, v in zip(R1, R2)]
    W = [a * u + b * v for u, v in zip(D1, D2)]
    E1 = [n2 * u - n1 * v for u, v in zip(R1, R2)]
    E2 = [n2 * u - n1 * v for u, v in zip(D1, D2)]
    return (
        PolyVectorField.from_exprs(Z, "Z"),
        PolyVectorField.from_exprs(W, "W"),
        PolyVectorField.from_exprs(E1, "E1"),
        PolyVectorField.from_exprs(E2, "E2"),
    )


def standard_fields(params: HopfParams):
    """``(Z, W, E1, E2)`` with the numeric ``a, b`` of ``params``."""
    return _fields(sp.Float(params.a, 17), sp.Float(params.b, 17))


def symbolic_fields():
    """``(Z, W, E1, E2)`` with symbolic ``a, b``: identities hold exactly."""
    return _fields(A_SYM, B_SYM)


def bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    """Lie bracket ``[X, Y] = DY X - DX Y``."""
    JX, JY = X.jacobian, Y.jacobian
    comps = []
    for i in range(4):
        c = sum((JY[i][j] * X.components[j] - JX[i][j] * Y.components[j] for j in range(4)),
                sp.Poly(0, *COORDS))
        comps.append(c)
    name = f"[{X.name},{Y.name}]" if X.name and Y.name else ""
    return PolyVectorField(tuple(comps), name)


def apply_J(X: PolyVectorField) -> PolyVectorField:
    """Standard complex structure: ``d/dx_k -> d/dy_k``, ``d/dy_k -> -d/dx_k``."""
    c = X.components
    return PolyVectorField((-c[1], c[0], -c[3], c[2]), f"J{X.name}" if X.name else "")


def w_bracket_defect(a, b):
    """Closed form of ``[W, E1]``: ``2 (b |z2|^2 R1 - a |z1|^2 R2)``.

    It never vanishes: at ``a = b`` it is ``2 a E1``, so ``E1`` is then only
    homogeneous under ``W``, not invariant.
    """
    x1, y1, x2, y2 = COORDS
    n1, n2 = x1 ** 2 + y1 ** 2, x2 ** 2 + y2 ** 2
    return PolyVectorField.from_exprs(
        [2 * b * n2 * y1, -2 * b * n2 * x1, -2 * a * n1 * y2, 2 * a * n1 * x2], "[W,E1]"
    )


def sigma_eval(params: HopfParams, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return params.a * (p[..., 0] ** 2 + p[..., 1] ** 2) + params.b * (p[..., 2] ** 2 + p[..., 3] ** 2)


def _eta(p, v, sigma):
    x1, y1, x2, y2 = np.moveaxis(p, -1, 0)
    v1, w1, v2, w2 = np.moveaxis(v, -1, 0)
    return (x1 * w1 - y1 * v1 + x2 * w2 - y2 * v2) / sigma


def eta_eval(params: HopfParams, p, fields=None):
    """``(eta(Z), eta(E1), eta(E2))`` at one or many points."""
    p = np.asarray(p, dtype=float)
    sigma = sigma_eval(params, p)
    if np.any(sigma == 0):
        raise DomainError("contact form undefined where sigma = 0")
    Z, _, E1, E2 = fields or standard_fields(params)
    return tuple(_eta(p, X(p), sigma) for X in (Z, E1, E2))


def check_unit_speed(params: HopfParams, p, fields=None):
    """``X(s(sigma))`` for ``X = E2 / sigma`` after normalizing ``p`` to the unit sphere.

    Exact gradient of ``sigma`` and the analytic ``s'``; the value is -1
    (``s`` decreases along ``E2``).
    """
    if params.diagonal:
        raise DomainError("a = b: the sigma band is empty")
    p = np.asarray(p, dtype=float)
    norm = np.sqrt(np.sum(p * p, axis=-1, keepdims=True))
    if np.any(norm == 0):
        raise DomainError("point at the origin")
    p = p / norm
    sigma = sigma_eval(params, p)
    if np.any((sigma <= params.p) | (sigma >= params.q)):
        raise DomainError("sigma outside the open band (p, q): point on a coordinate axis")
    E2 = (fields or standard_fields(params))[3]
    a, b = params.a, params.b
    grad = np.stack([2 * a * p[..., 0], 2 * a * p[..., 1], 2 * b * p[..., 2], 2 * b * p[..., 3]], axis=-1)
    dsig = np.sum(E2(p) * grad, axis=-1)
    q, pp = params.q, params.p
    n1 = p[..., 0] ** 2 + p[..., 1] ** 2
    n2 = p[..., 2] ** 2 + p[..., 3] ** 2
    # q - sigma and sigma - p without cancellation, using |z1|^2 + |z2|^2 = 1
    up = (q - a) * n1 + (q - b) * n2
    lo = (a - pp) * n1 + (b - pp) * n2
    ds = -q / (2 * up) - pp / (2 * lo)
    return ds * dsig / sigma
