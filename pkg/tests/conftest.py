import os

import pytest

from mpmo.kernels import available_backends

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session", autouse=True)
def front_cache(tmp_path_factory):
    """Share built reference fronts across the whole session, away from ~/.cache."""
    path = tmp_path_factory.mktemp("fronts")
    old = os.environ.get("MPMO_CACHE")
    os.environ["MPMO_CACHE"] = str(path)
    yield path
    if old is None:
        os.environ.pop("MPMO_CACHE", None)
    else:
        os.environ["MPMO_CACHE"] = old


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return available_backends()[request.param]


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
