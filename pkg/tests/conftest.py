import pytest

from espm.dataset import Dataset

# D0: a,b,c as boolean attributes; labels + + + - - +
D0_ROWS = [["a", "b", "c"], ["a", "b"], ["a", "c"], ["b", "c"], ["b"], ["a", "c"]]
D0_LABELS = ["+", "+", "+", "-", "-", "+"]
D0_CSV = "a,b,c,class\n1,1,1,+\n1,1,,+\n1,,1,+\n,1,1,-\n,1,,-\n1,,1,+\n"


@pytest.fixture
def d0():
    return Dataset.from_records(D0_ROWS, D0_LABELS)


@pytest.fixture
def d0_csv(tmp_path):
    path = tmp_path / "d0.csv"
    path.write_text(D0_CSV)
    return path


# -- acceptance reporting -----------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA[number] = (title, "PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[number]
        line = f"criterion {number} {title}: {status}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
