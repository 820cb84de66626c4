import numpy as np
import pytest

from chaoscover.gridmap import OCCUPIED, OccupancyGrid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def grid_from_rows(rows, res=0.05, origin=(0.0, 0.0)):
    """Build a grid from strings, top row first: '.' free, '#' occupied, '?' unknown."""
    table = {".": 0, "#": OCCUPIED, "?": -1}
    a = np.array([[table[ch] for ch in row] for row in rows], dtype=np.int16)[::-1]
    return OccupancyGrid.from_array(a, res=res, origin=origin)


@pytest.fixture
def fig4_grid():
    # tp lands on the occupied cell (4, 4); within 2 cells only (4, 2) has
    # all four axis neighbors free
    rows = [
        "#########",
        "#########",
        "#########",
        "#########",
        "######.##",
        "####.####",
        "###...###",
        "####.####",
        "#########",
    ]
    return grid_from_rows(rows)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
