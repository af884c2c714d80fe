import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "bcflab",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("bcflab")

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's verdict for the terminal summary."""
    marker = request.node.get_closest_marker("criterion")
    label = marker.args[0] if marker else request.node.name
    state = {"detail": ""}
    yield state
    rep = getattr(request.node, "rep_call", None)
    verdict = "PASS" if rep is not None and rep.passed else "FAIL"
    _ACCEPTANCE.append((label, verdict, state["detail"]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, verdict, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        line = f"{verdict}  {label}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
