"""The nine acceptance criteria, one test each.

Each test prints a single ``criterion N <name>: PASS|FAIL`` line (also
collected into the terminal summary) and fails if the check fails or
exceeds its time budget.
"""
import json

import pytest

from stablelp import checks

from conftest import ACCEPTANCE_LINES

CRITERIA = [
    (1, "density", 60),
    (2, "psi", 30),
    (3, "plancherel", 120),
    (4, "scaling", 300),
    (5, "chains", 120),
    (6, "maximal", 30),
    (7, "multiplier", 300),
    (8, "monte_carlo", 600),
    (9, "harnack", 120),
]


@pytest.mark.slow
@pytest.mark.parametrize("num,name,budget", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(num, name, budget):
    res = checks.CHECKS[name]()
    over = res.runtime_s > budget
    ok = res.passed and not over
    line = (f"criterion {num} {name}: {'PASS' if ok else 'FAIL'} "
            f"(value={res.value:.6g}, tol={res.tolerance:.3g}, {res.runtime_s:.1f}s / {budget}s)")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, json.dumps(res.details.get("failures"), default=str)
    assert not over, f"{name} took {res.runtime_s:.1f}s, budget {budget}s"
