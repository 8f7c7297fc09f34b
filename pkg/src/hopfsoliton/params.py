"""Hopf surface parameters and the transverse coordinate map.

Only the moduli of the contraction eigenvalues enter. The logarithmic sizes
are stored as positive numbers, ``a = -ln(alpha_mod)/2 >= b = -ln(beta_mod)/2``,
so the shooting target ``rho = a/b`` is at least one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

__all__ = ["HopfParams", "derive", "s_of_sigma", "ds_dsigma", "sigma_of_s"]


@dataclass(frozen=True)
class HopfParams:
    alpha_mod: float
    beta_mod: float
    a: float
    b: float
    rho: float

    @classmethod
    def from_rho(cls, rho: float, b: float = 1.0) -> "HopfParams":
        """Parameters with ``a/b = rho``; ``b`` fixes the overall size."""
        if not rho >= 1.0:
            raise DomainError(f"rho must be >= 1, got {rho!r}")
        if not b > 0:
            raise DomainError(f"b must be positive, got {b!r}")
        return derive(math.exp(-2.0 * rho * b), math.exp(-2.0 * b))

    @property
    def p(self) -> float:
        return min(self.a, self.b)

    @property
    def q(self) -> float:
        return max(self.a, self.b)

    @property
    def diagonal(self) -> bool:
        return self.alpha_mod == self.beta_mod


def derive(alpha_mod: float, beta_mod: float) -> HopfParams:
    alpha_mod = float(alpha_mod)
    beta_mod = float(beta_mod)
    if not (0.0 < alpha_mod < 1.0 and 0.0 < beta_mod < 1.0):
        raise DomainError(
            f"moduli must lie in (0, 1), got alpha_mod={alpha_mod!r}, beta_mod={beta_mod!r}"
        )
    if alpha_mod > beta_mod:
        raise DomainError(f"need alpha_mod <= beta_mod, got {alpha_mod!r} > {beta_mod!r}")
    a = -0.5 * math.log(alpha_mod)
    b = -0.5 * math.log(beta_mod)
    rho = 1.0 if alpha_mod == beta_mod else a / b
    return HopfParams(alpha_mod, beta_mod, a, b, rho)


def _check_band(params: HopfParams, sigma: float) -> None:
    p, q = params.p, params.q
    if not p < sigma < q:
        raise DomainError(f"sigma={sigma!r} outside the open interval ({p!r}, {q!r})")


def s_of_sigma(params: HopfParams, sigma: float) -> float:
    """``s = (q/2) ln(q - sigma) - (p/2) ln(sigma - p)``, strictly decreasing.

    Tends to +inf at ``sigma -> p`` and to -inf at ``sigma -> q``.
    """
    _check_band(params, sigma)
    p, q = params.p, params.q
    return 0.5 * q * math.log(q - sigma) - 0.5 * p * math.log(sigma - p)


def ds_dsigma(params: HopfParams, sigma: float) -> float:
    _check_band(params, sigma)
    p, q = params.p, params.q
    return -0.5 * q / (q - sigma) - 0.5 * p / (sigma - p)


def sigma_of_s(params: HopfParams, s: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Invert :func:`s_of_sigma` by bisection.

    Stops once ``|s_of_sigma(sigma) - s| <= tol`` and the bracket is narrower
    than ``tol``, or when the bracket can no longer be split in floating point
    (extreme ``s`` pushes sigma onto an endpoint to machine precision).
    """
    if params.p == params.q:
        raise DomainError("sigma band is empty when a == b")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    lo, hi = params.p, params.q
    best, best_res = None, math.inf
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        res = s_of_sigma(params, mid) - s
        if abs(res) < best_res:
            best, best_res = mid, abs(res)
        if abs(res) <= tol and hi - lo <= tol:
            return mid
        # s decreases in sigma
        if res > 0:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError(f"bisection did not converge in {max_iter} iterations")
    return best
