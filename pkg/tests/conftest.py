import sys
from pathlib import Path

# make the helper modules next to this file importable from every test module
sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
