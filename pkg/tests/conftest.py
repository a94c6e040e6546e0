import pytest

#: (criterion, passed, detail) lines collected by the acceptance tests
ACCEPTANCE = []


class Recorder:
    def __init__(self, name):
        self.name = name
        self.done = False

    def __call__(self, checks, detail=""):
        """Record one PASS/FAIL line from ``{description: bool}`` and assert."""
        failed = [k for k, ok in checks.items() if not ok]
        ACCEPTANCE.append((self.name, not failed, detail if not failed else
                           f"{detail}; failed: {', '.join(failed)}"))
        self.done = True
        assert not failed, f"{self.name}: {', '.join(failed)} ({detail})"


@pytest.fixture
def criterion(request):
    rec = Recorder(request.node.get_closest_marker("criterion").args[0])
    yield rec
    if not rec.done:
        ACCEPTANCE.append((rec.name, False, "raised before completing"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0][2:])):
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}: {detail}")
