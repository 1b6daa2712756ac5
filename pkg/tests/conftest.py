import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record_criterion(num: int, desc: str, ok: bool, detail: str = ""):
    """Register an acceptance-criterion outcome for the terminal summary."""
    _ACCEPTANCE[num] = (desc, bool(ok), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        desc, ok, detail = _ACCEPTANCE[num]
        status = "PASS" if ok else "FAIL"
        line = f"C{num:<2d} {status}  {desc}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
