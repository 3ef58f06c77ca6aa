import re

import pytest

_DETAILS = {}


class Criterion:
    def __init__(self, nodeid):
        self.nodeid = nodeid

    def note(self, text):
        _DETAILS[self.nodeid] = text


@pytest.fixture
def criterion(request):
    return Criterion(request.node.nodeid)


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", getattr(rep, "nodeid", ""))
            if not m or (rep.when != "call" and outcome == "passed"):
                continue
            n = int(m.group(1))
            ok = outcome == "passed" and rows.get(n, (True,))[0]
            rows[n] = (ok, m.group(2), _DETAILS.get(rep.nodeid, ""))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        ok, name, detail = rows[n]
        line = f"criterion {n:2d} {name}: {'PASS' if ok else 'FAIL'}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
