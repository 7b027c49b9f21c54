import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_results: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results.setdefault(int(m.group(1)), []).append((m.group(2), report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        parts = _results[n]
        failed = [name for name, outcome in parts if outcome != "passed"]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {n:2d}: {status}"
        if failed:
            line += f" (failing part: {', '.join(failed)})"
        terminalreporter.write_line(line)
