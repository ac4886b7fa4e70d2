import pytest

from convexlab.sampling import named_stream

MASTER_SEED = 20240611

ACCEPTANCE_LINES: dict[int, list[str]] = {}


@pytest.fixture
def rng(request):
    """A generator seeded from the test's own name, so tests do not share streams."""
    return named_stream(MASTER_SEED, request.node.name)


def record_criterion(number: int, passed: bool, text: str) -> str:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {text}"
    ACCEPTANCE_LINES.setdefault(number, []).append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        for line in ACCEPTANCE_LINES[number]:
            terminalreporter.write_line(line)
