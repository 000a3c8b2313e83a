import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horizon_mapf import GridMap, MapFormatError, Vertex, format_map, neighbors, parse_map

from conftest import grid_from, open_grid


def map_text(*rows, height=None, width=None):
    height = len(rows) if height is None else height
    width = len(rows[0]) if width is None else width
    return f"type octile\nheight {height}\nwidth {width}\nmap\n" + "\n".join(rows) + "\n"


def test_parse_all_open():
    g = parse_map(map_text("..", ".."))
    assert (g.width, g.height) == (2, 2)
    assert g.num_passable == 4


def test_parse_blocked_cell():
    g = parse_map(map_text(".@", ".."))
    assert not g.passable[0, 1]
    assert g.num_passable == 3
    assert not g.is_passable(g.cell(1, 0))


def test_passable_and_blocked_characters():
    g = parse_map(map_text(".G@OTSW"))
    assert g.passable.tolist() == [[True, True, False, False, False, False, False]]


def test_short_row_names_line():
    with pytest.raises(MapFormatError) as err:
        parse_map(map_text("...", "..", width=3))
    assert err.value.line == 6
    assert "row 1" in str(err.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ("height 2\nwidth 2\nmap\n..\n..\n", 1),
        ("type octile\nheight x\nwidth 2\nmap\n..\n..\n", 2),
        ("type octile\nheight 2\nmap\n..\n..\n", 3),
        ("type octile\nheight 2\nwidth 2\n..\n..\n", 4),
        ("type octile\nheight 3\nwidth 2\nmap\n..\n..\n", 6),
        ("type octile\nheight 2\nwidth 2\nmap\n..\n.x\n", 6),
    ],
)
def test_malformed_maps(text, line):
    with pytest.raises(MapFormatError) as err:
        parse_map(text)
    assert err.value.line == line


def test_cell_vertex_conversion():
    g = open_grid(5, 3)
    assert g.cell(4, 2) == 14
    assert g.xy(14) == Vertex(4, 2)


def test_neighbors_open_center(open3):
    c = open3.cell
    assert neighbors(open3, c(1, 1)) == [c(1, 0), c(2, 1), c(1, 2), c(0, 1)]


def test_neighbors_corner(open3):
    c = open3.cell
    assert neighbors(open3, c(0, 0)) == [c(1, 0), c(0, 1)]


def test_neighbors_one_blocked():
    g = grid_from(".@.", "...", "...")
    c = g.cell
    assert neighbors(g, c(1, 1)) == [c(2, 1), c(1, 2), c(0, 1)]


def test_move_table_pads_with_stay(open3):
    row = open3.move_table[open3.cell(0, 0)]
    assert row.tolist() == [0, 1, 3, 0, 0]


grids = st.integers(1, 9).flatmap(
    lambda w: st.integers(1, 9).flatmap(
        lambda h: st.lists(st.booleans(), min_size=w * h, max_size=w * h).map(
            lambda cells: GridMap(w, h, np.array(cells).reshape(h, w))
        )
    )
)


@settings(max_examples=60, deadline=None)
@given(grids)
def test_round_trip(g):
    again = parse_map(format_map(g))
    assert (again.width, again.height) == (g.width, g.height)
    assert np.array_equal(again.passable, g.passable)


@settings(max_examples=60, deadline=None)
@given(grids)
def test_neighbors_symmetric_and_bounded(g):
    for v in g.passable_cells().tolist():
        nb = neighbors(g, v)
        assert len(nb) <= 4 and v not in nb
        for u in nb:
            assert g.is_passable(u)
            assert v in neighbors(g, u)
