from hypothesis import HealthCheck, settings

settings.register_profile(
    "frac_lab",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("frac_lab")

# one line per acceptance criterion, shown after the test run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int("".join(c for c in s.split()[1] if c.isdigit())), s)):
            terminalreporter.write_line(line)
