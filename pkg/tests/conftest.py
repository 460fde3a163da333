"""Shared test plumbing.

Collects acceptance check outcomes so the run always ends with one
visible line per criterion, and pins hypothesis to a deterministic
profile so repeated runs explore identical cases.
"""

from hypothesis import HealthCheck, settings

ACCEPTANCE_LINES: list[str] = []

settings.register_profile(
    "det",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("det")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
