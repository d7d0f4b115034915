import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rlq import Mode, TimeGrid, benchmark_spec, solve_ctrl, solve_state  # noqa: E402

BENCH_CONFIG = {
    "mode": "state_dep", "T": 1.0, "x0": 1.0, "A": 0.02, "B": 0.375,
    "G": 1.0, "nu": 1.0, "mu1": 2.0, "xi": 10.0, "D": 1.0,
}


@pytest.fixture(scope="session")
def grid():
    return TimeGrid(1.0, 2000)


@pytest.fixture(scope="session")
def bench_state(grid):
    spec = benchmark_spec()
    coeffs, policy = solve_state(spec, grid)
    return spec, coeffs, policy


@pytest.fixture(scope="session")
def bench_ctrl(grid):
    spec = benchmark_spec(mode=Mode.CTRL_DEP)
    coeffs, policy = solve_ctrl(spec, grid)
    return spec, coeffs, policy


@pytest.fixture
def bench_config(tmp_path):
    def write(**changes):
        path = tmp_path / "bench.json"
        path.write_text(json.dumps({**BENCH_CONFIG, **changes}), encoding="utf-8")
        return path

    return write


# -- acceptance summary: one PASS/FAIL line per criterion ----------------------

_CRITERIA: dict[str, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            cid, title = mark.args
            _CRITERIA.setdefault(cid, {"title": title, "outcomes": []})
            item.user_properties.append(("criterion", cid))


def pytest_runtest_logreport(report):
    cid = dict(report.user_properties).get("criterion")
    if cid is None or (report.when != "call" and report.outcome == "passed"):
        return
    if hasattr(report, "wasxfail"):
        outcome = "xpassed" if report.outcome == "passed" else "xfailed"
    else:
        outcome = report.outcome
    _CRITERIA[cid]["outcomes"].append(outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)):
        info = _CRITERIA[cid]
        outs = info["outcomes"]
        if not outs:
            continue
        if all(o == "passed" for o in outs):
            status = "PASS"
        elif "xfailed" in outs and all(o in ("passed", "xfailed") for o in outs):
            n = outs.count("xfailed")
            status = f"FAIL (known, {n}/{len(outs)} cases unattainable; see decisions ledger)"
        else:
            status = "FAIL"
        tr.write_line(f"{status.split()[0]:4}  [{cid:>3}] {info['title']}" + (
            "" if status in ("PASS", "FAIL") else "  " + status[5:]))
