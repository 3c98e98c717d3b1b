import pytest

_ACCEPTANCE: dict[int, str] = {}


class Criterion:
    """Collects the checks of one acceptance criterion and reports a single line."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.failures: list[str] = []
        self.details: list[str] = []

    def check(self, label: str, passed: bool, value=None, bound=None) -> None:
        text = label if value is None else f"{label}={value:.3g}" + ("" if bound is None else f" (bound {bound:g})")
        self.details.append(text)
        if not passed:
            self.failures.append(text)

    def finish(self) -> None:
        status = "FAIL" if self.failures else "PASS"
        line = f"[{status}] criterion {self.number:2d}: {self.title}"
        if self.failures:
            line += " -- violated: " + "; ".join(self.failures)
        _ACCEPTANCE[self.number] = line
        print(line)
        assert not self.failures, line


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    return Criterion(*marker.args)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call" and rep.failed and marker.args[0] not in _ACCEPTANCE:
        # the test raised before reaching its summary line
        number, title = marker.args
        _ACCEPTANCE[number] = f"[FAIL] criterion {number:2d}: {title} -- error: {call.excinfo.typename}"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
