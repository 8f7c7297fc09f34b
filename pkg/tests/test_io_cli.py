import json

import numpy as np
import pytest

from hopfsoliton import io
from hopfsoliton.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_SOLVER, main
from hopfsoliton.errors import MalformedFile
from hopfsoliton.geometry import verify_soliton


@pytest.fixture(scope="module")
def profile_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("prof") / "s15.csv"
    assert main(["solve", "--rho", "1.5", "--grid", "1024", "--out", str(path)]) == EXIT_OK
    return path


def test_round_trip(profile15, tmp_path):
    path = tmp_path / "p.csv"
    io.write_profile(path, profile15, tolerances={"rtol": 1e-12}, solver={"method": "dopri5"})
    back = io.read_profile(path)
    for name in ("r", "phi", "dphi", "psi", "gamma", "f", "R", "F2", "x", "y", "z"):
        assert np.array_equal(getattr(back, name), getattr(profile15, name)), name
    assert back.params.a == pytest.approx(profile15.params.a, rel=1e-14)
    assert back.lam == profile15.lam and back.A == profile15.A
    assert back.meta["solver"] == {"method": "dopri5"}
    assert verify_soliton(back).passed


def test_solve_is_deterministic(profile_file, tmp_path):
    again = tmp_path / "again.csv"
    assert main(["solve", "--rho", "1.5", "--grid", "1024", "--out", str(again)]) == EXIT_OK
    assert again.read_bytes() == profile_file.read_bytes()
    assert io.meta_path(again).read_bytes() == io.meta_path(profile_file).read_bytes()


def test_metadata_contents(profile_file):
    meta = json.loads(io.meta_path(profile_file).read_text())
    assert meta["rho"] == pytest.approx(1.5)
    assert meta["solver"]["system"] == "soliton"
    assert meta["tolerances"]["rho_tol"] == 1e-8
    assert meta["L"] == pytest.approx(np.pi * np.sqrt(0.25), rel=1e-8)


def test_verify_ok(profile_file):
    assert main(["verify", str(profile_file)]) == EXIT_OK


def test_verify_detects_tampering(profile_file, tmp_path):
    data = io.read_table(profile_file, io.PROFILE_COLUMNS)
    data[300, io.PROFILE_COLUMNS.index("psi")] *= 1.01
    bad = tmp_path / "bad.csv"
    np.savetxt(bad, data, fmt=io.FMT, delimiter=",", header=",".join(io.PROFILE_COLUMNS), comments="")
    io.meta_path(bad).write_bytes(io.meta_path(profile_file).read_bytes())
    assert main(["verify", str(bad)]) == EXIT_FAIL


def _copy_with(tmp_path, src, lines=None, meta=None, name="m.csv"):
    dst = tmp_path / name
    text = src.read_text().splitlines(keepends=True)
    dst.write_text("".join(lines(text) if lines else text))
    if meta is not False:
        m = json.loads(io.meta_path(src).read_text())
        io.meta_path(dst).write_text(json.dumps(meta(m) if meta else m))
    return dst


@pytest.mark.parametrize("case", ["truncated", "header", "nan", "text", "no_meta", "bad_meta", "L", "order"])
def test_malformed_inputs(profile_file, tmp_path, case):
    edits = {
        "truncated": dict(lines=lambda t: t[:10]),
        "header": dict(lines=lambda t: ["r,x,y\n"] + t[1:]),
        "nan": dict(lines=lambda t: t[:5] + [t[5].replace(t[5].split(",")[4], "nan", 1)] + t[6:]),
        "text": dict(lines=lambda t: t[:5] + ["oops\n"] + t[6:]),
        "no_meta": dict(meta=False),
        "bad_meta": dict(meta=lambda m: {k: v for k, v in m.items() if k != "alpha_mod"}),
        "L": dict(meta=lambda m: {**m, "L": 2 * m["L"]}),
        "order": dict(lines=lambda t: [t[0], t[2], t[1]] + t[3:]),
    }
    path = _copy_with(tmp_path, profile_file, **edits[case])
    with pytest.raises(MalformedFile):
        io.read_profile(path)
    assert main(["verify", str(path)]) == EXIT_IO


def test_missing_file(tmp_path):
    assert main(["verify", str(tmp_path / "nope.csv")]) == EXIT_IO


@pytest.mark.parametrize("argv", [
    ["solve", "--rho", "0.5"],
    ["solve", "--rho", "1.5", "--alpha-mod", "0.5"],
    ["solve"],
    ["portrait", "--z0-min", "2", "--z0-max", "1"],
    ["bogus"],
])
def test_usage_errors(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path / "x")] if argv[0] != "bogus" else [])) == EXIT_SOLVER


def test_solve_round(tmp_path):
    out = tmp_path / "round.csv"
    assert main(["solve", "--rho", "1.0", "--grid", "256", "--out", str(out)]) == EXIT_OK
    assert io.read_profile(out).L == pytest.approx(np.pi)
    assert main(["solve", "--alpha-mod", "0.5", "--beta-mod", "0.5", "--grid", "256",
                 "--out", str(out)]) == EXIT_OK


def test_flow_cli(profile_file, tmp_path):
    out = tmp_path / "diag.csv"
    assert main(["flow", "--profile", str(profile_file), "--n", "64", "--t-end", "0.01",
                 "--out", str(out)]) == EXIT_OK
    d = io.read_table(out, io.DIAG_COLUMNS)
    assert d[0, 0] == 0 and d[-1, 0] == pytest.approx(0.01)
    assert np.ptp(d[:, 2]) <= 1e-12 * d[0, 2]
    assert main(["flow", "--profile", str(profile_file), "--n", "64", "--dt", "1",
                 "--out", str(out)]) == EXIT_SOLVER


def test_portrait(tmp_path):
    out = tmp_path / "portrait"
    assert main(["portrait", "--out", str(out), "--samples", "128"]) == EXIT_OK
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0] == "z0,T,yT,rho,t2,status"
    rows = [l.split(",") for l in lines[1:]]
    assert len(rows) == 20 and all(r[-1] == "ok" for r in rows)
    assert all(float(r[2]) < 0 for r in rows)
    assert len(list(out.glob("trajectory_*.csv"))) == 20
    tr = io.read_table(out / "trajectory_000.csv", ("r", "x", "y", "z"))
    assert tr.shape == (128, 4) and tr[0, 1] == 0 and tr[0, 2] == 1


def test_sasaki_cli(capsys):
    assert main(["sasaki", "--alpha-mod", "0.25", "--beta-mod", "0.5", "--samples", "500"]) == EXIT_OK
    assert main(["sasaki", "--alpha-mod", "0.5", "--beta-mod", "0.5", "--samples", "200"]) == EXIT_OK
    assert "skipped" in capsys.readouterr().out
