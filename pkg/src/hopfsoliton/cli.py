"""Command line front end.

Exit codes: 0 pass, 1 a check failed, 2 solver failure or bad usage,
3 file input/output problem.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import flow as fl
from . import io
from . import sasaki as sk
from .errors import MalformedFile, NoBracket, SolitonError
from .geometry import (
    SolitonProfile,
    chern_integral,
    cone_angles,
    gauss_bonnet,
    hopf_fixed_point,
    reconstruct,
    verify_soliton,
)
from .ode import SOLITON, SYSTEMS, ToleranceSettings, integrate
from .params import HopfParams, derive
from .shooting import solve_for_rho

log = logging.getLogger("hopfsoliton")

EXIT_OK, EXIT_FAIL, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
# below this rho - 1 an unbracketed target is treated as the diagonal case
ROUND_FALLBACK = 1e-6
GB_TOL = 1e-6
CHERN_TOL = 1e-8


class UsageError(Exception):
    pass


def solve_profile(params: HopfParams, tol: float = 1e-8, n_grid: int = 2048,
                  ctrl: Optional[ToleranceSettings] = None):
    """Shoot, rescale and reconstruct; returns ``(profile, ShootingResult or None)``.

    Diagonal parameters give the closed-form round profile directly.
    """
    if params.diagonal:
        return hopf_fixed_point(n_grid, params), None
    ctrl = dataclasses.replace(ctrl or ToleranceSettings(), n_samples=n_grid)
    try:
        res = solve_for_rho(params.rho, tol, ctrl, system=SOLITON, params=params)
    except NoBracket:
        if params.rho - 1.0 > ROUND_FALLBACK:
            raise
        log.warning("rho=%r is within %g of 1 and has no bracket: using the round profile",
                    params.rho, ROUND_FALLBACK)
        return hopf_fixed_point(n_grid, derive(params.beta_mod, params.beta_mod)), None
    return reconstruct(res.trajectory, params), res


def check_profile(profile: SolitonProfile, tol: float):
    """Residual report plus Gauss-Bonnet and Chern checks, as table rows."""
    rep = verify_soliton(profile, tol)
    rows = [(name, val, tol, val <= tol) for name, val in rep.rows()]
    num, ana = gauss_bonnet(profile)
    gb = abs(num - ana) / abs(ana)
    rows.append(("Gauss-Bonnet rel. error", gb, GB_TOL, gb <= GB_TOL))
    chern = chern_integral(profile)
    rows.append(("Chern integral (must be > 0)", chern, 0.0, chern > 0))
    return rows


def _print_rows(rows, out=sys.stdout):
    for name, val, tol, ok in rows:
        print(f"  {name:<40s} {val:14.6e}  (tol {tol:.1e})  {'ok' if ok else 'FAIL'}", file=out)


def _params_from_args(args) -> HopfParams:
    if args.rho is not None:
        if args.alpha_mod is not None or args.beta_mod is not None:
            raise UsageError("give either --rho or --alpha-mod/--beta-mod, not both")
        if not args.rho >= 1.0:
            raise UsageError(f"--rho must be at least 1, got {args.rho!r}")
        return HopfParams.from_rho(args.rho, b=args.b)
    if args.alpha_mod is None or args.beta_mod is None:
        raise UsageError("need --rho or both --alpha-mod and --beta-mod")
    return derive(args.alpha_mod, args.beta_mod)


def cmd_solve(args) -> int:
    params = _params_from_args(args)
    t0 = time.perf_counter()
    profile, res = solve_profile(params, args.tol, args.grid)
    elapsed = time.perf_counter() - t0
    print(f"a={params.a:.12g} b={params.b:.12g} rho={params.rho:.12g}")
    if res is None:
        print(f"round profile: L=pi, slopes (1, -1), grid {profile.n}")
    else:
        print(f"z0={res.z0:.15g} rho_achieved={res.rho_achieved:.15g} iterations={res.iterations} "
              f"brackets={len(res.brackets)}")
        print(f"L={profile.L:.15g} lambda={profile.lam:.15g} slopes ({profile.dphi[0]:.12g}, "
              f"{profile.dphi[-1]:.12g})")
    c1, c2 = cone_angles(profile)
    print(f"cone angles {c1:.12g} {c2:.12g}; solved in {elapsed:.2f}s")
    rows = check_profile(profile, args.verify_tol)
    _print_rows(rows)
    solver = {"system": SOLITON.name if res is not None else "round", "method": "dopri5",
              "root": "log-bisection", "grid": args.grid}
    tolerances = dataclasses.asdict(ToleranceSettings())
    tolerances.update(rho_tol=args.tol, verify_tol=args.verify_tol)
    tolerances = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                  for k, v in tolerances.items()}
    mp = io.write_profile(args.out, profile, tolerances=tolerances, solver=solver)
    print(f"wrote {args.out} and {mp}")
    return EXIT_OK if all(r[3] for r in rows) else EXIT_FAIL


def cmd_verify(args) -> int:
    profile = io.read_profile(args.profile)
    rows = check_profile(profile, args.tol)
    print(f"{args.profile}: A={profile.A:g} L={profile.L:.12g} n={profile.n}")
    _print_rows(rows)
    ok = all(r[3] for r in rows)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_flow(args) -> int:
    profile = io.read_profile(args.profile)
    bg = fl.FlowBackground.from_profile(profile, args.n)
    st0 = fl.FlowState.zero(bg)
    if args.perturb:
        st0.u[:] = args.perturb * np.cos(2.0 * np.pi * bg.r / bg.r[-1])
    diags, _ = fl.run(bg, st0, args.t_end, args.diag_every, dt=args.dt)
    io.write_diagnostics(args.out, diags)
    first, last = diags[0], diags[-1]

    def drift(name):
        v0 = getattr(first, name)
        return max(abs(getattr(d, name) - v0) for d in diags) / abs(v0)

    rows = [("chern drift", drift("chern"), CHERN_TOL)]
    if not args.perturb:
        rows += [(f"{k} drift", drift(k), args.drift_tol) for k in ("area", "Rmin", "Rmax", "tau_min", "tau_max")]
    finite = all(np.isfinite([d.area, d.Rmin, d.Rmax]).all() for d in diags)
    print(f"flow to t={last.t:.6g} on {bg.n} nodes, {len(diags)} records -> {args.out}")
    ok = finite
    for name, val, tol in rows:
        good = val <= tol
        ok &= good
        print(f"  {name:<16s} {val:12.4e}  (tol {tol:.1e})  {'ok' if good else 'FAIL'}")
    print(f"  final res1={last.res1:.3e} res2={last.res2:.3e} res3={last.res3:.3e}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_portrait(args) -> int:
    if not 0 < args.z0_min <= args.z0_max or args.count < 1:
        raise UsageError("need 0 < --z0-min <= --z0-max and --count >= 1")
    system = SYSTEMS[args.system]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctrl = ToleranceSettings(n_samples=args.samples)
    z0s = np.geomspace(args.z0_min, args.z0_max, args.count)
    rows, n_ok = [], 0
    for k, z0 in enumerate(z0s):
        try:
            traj = integrate(z0, ctrl, system=system)
        except SolitonError as exc:
            rows.append((z0, math.nan, math.nan, math.nan, math.nan, type(exc).__name__))
            continue
        n_ok += 1
        io.write_trajectory(out / f"trajectory_{k:03d}.csv", traj)
        yT = traj.terminal_y
        t2 = traj.phase_marks.t2
        rows.append((z0, traj.T, yT, max(abs(yT), 1 / abs(yT)), math.nan if t2 is None else t2, "ok"))
    with (out / "summary.csv").open("w") as fh:
        fh.write("z0,T,yT,rho,t2,status\n")
        for r in rows:
            fh.write(",".join(io.FMT % v for v in r[:5]) + f",{r[5]}\n")
    print(f"{n_ok}/{len(rows)} trajectories of the {system.name} system written to {out}")
    return EXIT_OK if n_ok else EXIT_SOLVER


def cmd_sasaki(args) -> int:
    params = derive(args.alpha_mod, args.beta_mod)
    t0 = time.perf_counter()
    results = []

    def record(name, ok, detail=""):
        results.append(ok)
        print(f"  {name:<44s} {'ok' if ok else 'FAIL'}  {detail}")

    Zs, Ws, E1s, E2s = sk.symbolic_fields()
    for X, Y in ((E1s, Zs), (E2s, Zs), (Zs, Ws)):
        record(f"[{X.name},{Y.name}] = 0 (symbolic a, b)", sk.bracket(X, Y).is_zero())
    record("J E1 = E2 (symbolic)", (sk.apply_J(E1s) - E2s).is_zero())
    JJ = sk.apply_J(sk.apply_J(E1s))
    record("J^2 = -1 on E1", all((c + d).is_zero for c, d in zip(JJ.components, E1s.components)))
    for i, E in ((1, E1s), (2, E2s)):
        defect = sk.w_bracket_defect(sk.A_SYM, sk.B_SYM)
        target = defect if i == 1 else sk.apply_J(defect)
        record(f"[W,E{i}] matches its closed form (nonzero)", (sk.bracket(Ws, E) - target).is_zero())

    fields = sk.standard_fields(params)
    Z, W, E1, E2 = fields
    for X, Y in ((E1, Z), (E2, Z), (Z, W)):
        B = sk.bracket(X, Y)
        record(f"[{X.name},{Y.name}] coefficients at a, b", B.is_zero(1e-12), f"max {B.max_coeff():.1e}")

    rng = np.random.default_rng(args.seed)
    pts = rng.normal(size=(args.samples, 4))
    eZ, e1, e2 = sk.eta_eval(params, pts, fields)
    record("eta(Z) = -1", np.max(np.abs(eZ + 1)) <= 1e-12, f"max dev {np.max(np.abs(eZ + 1)):.1e}")
    record("eta(E1) = 0", np.max(np.abs(e1)) <= 1e-12, f"max {np.max(np.abs(e1)):.1e}")
    record("eta(E2) = 0", np.max(np.abs(e2)) <= 1e-12, f"max {np.max(np.abs(e2)):.1e}")
    jerr = _jacobian_check(fields, pts[:100])
    record("exact Jacobians vs central differences", jerr <= 1e-7, f"max {jerr:.1e}")
    if params.diagonal:
        print("  |X(s(sigma))| = 1                             skipped: a = b leaves no sigma band")
    else:
        v = sk.check_unit_speed(params, pts, fields)
        dev = np.max(np.abs(np.abs(v) - 1))
        record("|X(s(sigma))| = 1", dev <= 1e-12, f"max dev {dev:.1e}")
    ok = all(results)
    print(f"{'PASS' if ok else 'FAIL'} ({args.samples} samples, {time.perf_counter() - t0:.2f}s)")
    return EXIT_OK if ok else EXIT_FAIL


def _jacobian_check(fields, pts, h=1e-6):
    """Largest gap between exact Jacobians and central differences."""
    worst = 0.0
    for X in fields:
        jac = X.jacobian_at(pts)
        for j in range(4):
            dp = np.zeros(4)
            dp[j] = h
            fd = (X(pts + dp) - X(pts - dp)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(fd - jac[:, :, j]))))
    return worst


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hopfsoliton", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="shoot for a soliton profile and write it")
    s.add_argument("--alpha-mod", type=float)
    s.add_argument("--beta-mod", type=float)
    s.add_argument("--rho", type=float)
    s.add_argument("--b", type=float, default=1.0, help="size b used with --rho (default 1)")
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--verify-tol", type=float, default=1e-6)
    s.add_argument("--grid", type=int, default=2048)
    s.add_argument("--out", default="profile.csv")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="re-check a profile file")
    v.add_argument("profile")
    v.add_argument("--tol", type=float, default=1e-6)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("flow", help="run the reduced flow from a profile")
    f.add_argument("--profile", required=True)
    f.add_argument("--t-end", type=float, default=0.1)
    f.add_argument("--n", type=int, default=512)
    f.add_argument("--diag-every", type=int, default=1000)
    f.add_argument("--perturb", type=float, default=0.0)
    f.add_argument("--dt", type=float)
    f.add_argument("--drift-tol", type=float, default=1e-3)
    f.add_argument("--out", default="flow_diagnostics.csv")
    f.set_defaults(func=cmd_flow)

    p = sub.add_parser("portrait", help="sweep z0 and write trajectories")
    p.add_argument("--z0-min", type=float, default=0.05)
    p.add_argument("--z0-max", type=float, default=50.0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--system", choices=sorted(SYSTEMS), default="reduced")
    p.add_argument("--out", default="portrait")
    p.set_defaults(func=cmd_portrait)

    k = sub.add_parser("sasaki", help="check the Sasaki frame identities")
    k.add_argument("--alpha-mod", type=float, required=True)
    k.add_argument("--beta-mod", type=float, required=True)
    k.add_argument("--samples", type=int, default=10000)
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=cmd_sasaki)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (MalformedFile, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolitonError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
