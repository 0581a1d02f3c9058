"""Shared pytest plumbing: collect acceptance-criterion verdict lines and echo
them in the terminal summary, where they survive output capture."""

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    print(line, flush=True)
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.line(line)
