import pytest

CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``with criterion(3, "scaling classification"): ...``.  The line is
    printed immediately and repeated in the terminal summary so it survives
    output capture.
    """

    class _Recorder:
        def __call__(self, number, title):
            self.number, self.title = number, title
            self.detail = ""
            return self

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            line = f"{status} criterion {self.number}: {self.title}"
            if self.detail:
                line += f" ({self.detail})"
            CRITERIA[self.number] = line
            print(line)
            return False

    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[number])
