from __future__ import annotations

import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

import _shared  # noqa: E402

settings.register_profile(
    "bkskit",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
    derandomize=True,
)
settings.load_profile("bkskit")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _shared.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in _shared.RESULTS:
        terminalreporter.write_line(line)
    passed = sum(1 for line in _shared.RESULTS if line.startswith("PASS"))
    terminalreporter.write_line(f"{passed}/{len(_shared.RESULTS)} criterion checks passed")
