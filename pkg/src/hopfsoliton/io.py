"""CSV and JSON formats for profiles, trajectories and flow diagnostics.

Floats are written with 17 significant digits so every file round-trips
64-bit values exactly and identical runs give identical bytes.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, MalformedFile
from .geometry import SolitonProfile
from .params import derive

__all__ = [
    "PROFILE_COLUMNS",
    "DIAG_COLUMNS",
    "meta_path",
    "write_profile",
    "read_profile",
    "write_trajectory",
    "write_diagnostics",
    "read_table",
]

PROFILE_COLUMNS = ("r", "x", "y", "z", "phi", "dphi", "psi", "gamma", "f", "R", "F2")
DIAG_COLUMNS = ("t", "area", "chern", "Rmin", "Rmax", "res1", "res2", "res3")
FMT = "%.17g"


def meta_path(path) -> Path:
    return Path(path).with_suffix(".json")


def _write_table(path, columns, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack(data), fmt=FMT, delimiter=",", header=",".join(columns), comments="")


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_profile(path, profile: SolitonProfile, *, tolerances: Optional[dict] = None,
                  solver: Optional[dict] = None) -> Path:
    """Write the profile CSV and its ``.json`` companion; returns the JSON path."""
    p = profile.params
    _write_table(path, PROFILE_COLUMNS, [
        profile.r, profile.x, profile.y, profile.z, profile.phi, profile.dphi, profile.psi,
        profile.gamma, profile.f, profile.R, profile.F2,
    ])
    meta = {
        "alpha_mod": p.alpha_mod, "beta_mod": p.beta_mod, "a": p.a, "b": p.b, "rho": p.rho,
        "z0": profile.z0, "A": profile.A, "T": profile.T, "L": profile.L, "lambda": profile.lam,
        "tolerances": tolerances or {}, "solver": solver or {},
    }
    mp = meta_path(path)
    mp.write_text(json.dumps({k: _clean(v) for k, v in meta.items()}, indent=2, sort_keys=True) + "\n")
    return mp


def read_table(path, columns: Iterable[str]) -> np.ndarray:
    path = Path(path)
    columns = tuple(columns)
    try:
        with path.open() as fh:
            header = fh.readline().strip()
            if tuple(header.split(",")) != columns:
                raise MalformedFile(f"{path}: expected header {','.join(columns)!r}, got {header!r}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    if data.shape[1] != len(columns):
        raise MalformedFile(f"{path}: expected {len(columns)} columns, got {data.shape[1]}")
    if not np.all(np.isfinite(data)):
        raise MalformedFile(f"{path}: non-finite values")
    return data


def read_profile(path) -> SolitonProfile:
    """Inverse of :func:`write_profile`; raises :class:`MalformedFile` on bad input."""
    path = Path(path)
    data = read_table(path, PROFILE_COLUMNS)
    if data.shape[0] < 16:
        raise MalformedFile(f"{path}: only {data.shape[0]} rows")
    cols = dict(zip(PROFILE_COLUMNS, data.T))
    r = cols["r"]
    dr = np.diff(r)
    if r[0] != 0.0 or np.any(dr <= 0):
        raise MalformedFile(f"{path}: r must start at 0 and increase strictly")
    if np.ptp(dr) > 1e-9 * dr.mean():
        raise MalformedFile(f"{path}: r grid is not uniform")
    try:
        meta = json.loads(meta_path(path).read_text())
        params = derive(meta["alpha_mod"], meta["beta_mod"])
        A, lam = float(meta["A"]), float(meta["lambda"])
    except FileNotFoundError as exc:
        raise MalformedFile(f"{path}: metadata file {meta_path(path)} missing") from exc
    except (KeyError, TypeError, ValueError, DomainError) as exc:
        raise MalformedFile(f"{path}: bad metadata ({exc})") from exc
    if abs(float(meta.get("L", r[-1])) - r[-1]) > 1e-9 * r[-1]:
        raise MalformedFile(f"{path}: rows end at r={r[-1]!r} but metadata says L={meta['L']!r}")
    return SolitonProfile(
        r=r, phi=cols["phi"], dphi=cols["dphi"], psi=cols["psi"], gamma=cols["gamma"], f=cols["f"],
        lam=lam, A=A, L=float(r[-1]), R=cols["R"], F2=cols["F2"], params=params,
        x=cols["x"], y=cols["y"], z=cols["z"], z0=meta.get("z0"), T=meta.get("T"),
        meta={k: meta[k] for k in ("tolerances", "solver") if k in meta},
    )


def write_trajectory(path, traj) -> None:
    _write_table(path, ("r", "x", "y", "z"), [traj.r, traj.x, traj.y, traj.z])


def write_diagnostics(path, diags) -> None:
    rows = [[getattr(d, c) for c in DIAG_COLUMNS] for d in diags]
    _write_table(path, DIAG_COLUMNS, np.asarray(rows, dtype=float).T)
