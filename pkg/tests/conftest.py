import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from multiphase_grover.core import RegisterShape
from multiphase_grover.robustness import ScanSettings, register_sweep, robustness_record
from multiphase_grover.simulator import PhaseAssignment, run_trace

SWEEP_N = list(range(20, 776, 15))


def deterministic_phase_oracle(n, m, t):
    """Phase phi = omega making P(t) = 1, found by grid search plus bounded
    refinement on the simulator. Independent of the closed-form phase."""
    shape = RegisterShape(n, m)

    def miss(p):
        return 1.0 - run_trace(shape, PhaseAssignment.uniform(p, m), t).probs[t]

    grid = np.linspace(0.05, math.pi, 3000)
    vals = [miss(p) for p in grid]
    i = int(np.argmin(vals))
    res = minimize_scalar(miss, bounds=(grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]),
                          method="bounded", options={"xatol": 1e-12})
    return res.x, res.fun


# wall-clock seconds of the expensive session fixtures, for runtime budgets
TIMINGS: dict[str, float] = {}
# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def _timed(name, fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    TIMINGS[name] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def record_200():
    return _timed("record_200", robustness_record, 200)


@pytest.fixture(scope="session")
def record_325():
    return _timed("record_325", robustness_record, 325)


@pytest.fixture(scope="session")
def sweep_records():
    return _timed("sweep", register_sweep, SWEEP_N, ScanSettings())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
