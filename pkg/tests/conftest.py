import hypothesis.strategies as st
from hypothesis import settings

from lcsfluct.bitstrings import BinaryString

settings.register_profile("default", deadline=None, max_examples=150)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def bits(max_size: int = 12, min_size: int = 0):
    return st.text(alphabet="01", min_size=min_size, max_size=max_size)


def binary_strings(max_size: int = 12, min_size: int = 0):
    return bits(max_size, min_size).map(BinaryString.from_str)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").split("/")[0])):
            terminalreporter.write_line(line)
