import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: list[tuple[str, str, str]] = []


def _status(passed):
    return "SKIP" if passed is None else ("PASS" if passed else "FAIL")


@pytest.fixture
def record_acceptance():
    """Collect one pass/fail line per acceptance criterion for the summary.

    ``passed=None`` records a criterion that could not run here.
    """
    def record(name: str, passed, detail: str = ""):
        line = f"{_status(passed)}  {name}" + (f"  [{detail}]" if detail else "")
        print(line)
        _ACCEPTANCE.append((name, _status(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))


def draw_quad_image(quad, width=240, height=427, fg=(220, 220, 210), bg=(40, 60, 50)):
    """Flat-colored quad on a flat background, no noise."""
    from docquad.geometry import rasterize_polygon

    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:] = bg
    img[rasterize_polygon(np.asarray(quad, dtype=float), width, height)] = fg
    return img


@pytest.fixture
def doc_quad():
    return np.array([[50.0, 110.0], [190.0, 100.0], [200.0, 320.0], [40.0, 330.0]])


@pytest.fixture
def doc_image(doc_quad):
    return draw_quad_image(doc_quad)
