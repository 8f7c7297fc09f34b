import math

import pytest

from hopfsoliton.cli import solve_profile
from hopfsoliton.geometry import hopf_fixed_point
from hopfsoliton.params import HopfParams

ACCEPTANCE = {}


def record_acceptance(number, title, ok, detail):
    ACCEPTANCE[number] = (title, bool(ok), detail)


@pytest.fixture(scope="session")
def round_profile():
    return hopf_fixed_point()


@pytest.fixture(scope="session")
def soliton_profiles():
    """Profiles on the default 2048 grid, solved once per session."""
    cache = {}

    def get(rho):
        if rho not in cache:
            cache[rho] = solve_profile(HopfParams.from_rho(rho))
        return cache[rho]

    return get


@pytest.fixture(scope="session")
def profile15(soliton_profiles):
    return soliton_profiles(1.5)[0]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
    n_ok = sum(v[1] for v in ACCEPTANCE.values())
    tr.write_line(f"{n_ok}/{len(ACCEPTANCE)} criteria pass")
