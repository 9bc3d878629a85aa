import pytest
from hypothesis import given, strategies as st

from cbsaa.movingai import FormatError, ScenRow, empty_grid, load_map, parse_map, parse_scen, scen_to_text


def map_text(rows):
    return f"type octile\nheight {len(rows)}\nwidth {len(rows[0])}\nmap\n" + "\n".join(rows) + "\n"


def test_small_maps():
    g = parse_map(map_text(["..", ".."]))
    assert len(g.vertices()) == 4 and len(g.edges()) == 4
    g = parse_map(map_text([".@."]))
    assert len(g.vertices()) == 2 and g.edges() == []


def test_empty_32():
    g = load_map("empty-32-32")
    assert len(g.vertices()) == 1024 and len(g.edges()) == 1984


def test_glyphs():
    g = parse_map(map_text(["G.T", "O@."]))
    assert g.passable(0, 0) and not g.passable(2, 0) and not g.passable(0, 1)


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("type octile\nheight 1\nwidth 3\nmap\n.x.\n", 5, 2),
        ("type octile\nheight 2\nwidth 3\nmap\n...\n..\n", 6, None),
        ("type octile\nheihgt 1\nwidth 3\nmap\n...\n", 2, None),
    ],
)
def test_parse_errors_locate(text, line, column):
    with pytest.raises(FormatError) as err:
        parse_map(text)
    assert err.value.line == line and err.value.column == column


def test_missing_header_and_rows():
    with pytest.raises(FormatError):
        parse_map("type octile\nheight 1\nwidth 1\n")
    with pytest.raises(FormatError):
        parse_map("type octile\nheight 3\nwidth 1\nmap\n.\n")


def scen(rows, w=3, h=2):
    body = "".join(f"0\tm.map\t{w}\t{h}\t{a}\t{b}\t{c}\t{d}\t1.0\n" for a, b, c, d in rows)
    return "version 1\n" + body


def test_scen_rows():
    g = parse_map(map_text(["...", ".@."]))
    rows = parse_scen(scen([(0, 0, 2, 1), (2, 0, 2, 0)]), g)
    assert [(r.start, r.goal) for r in rows] == [((0, 0), (2, 1)), ((2, 0), (2, 0))]


@pytest.mark.parametrize(
    "text",
    [
        scen([(0, 0, 2, 1)], w=4),
        scen([(1, 1, 0, 0)]),
        scen([(0, 0, 3, 0)]),
        "version 1\n0\tm.map\t3\t2\t0\t0\n",
    ],
)
def test_scen_errors(text):
    g = parse_map(map_text(["...", ".@."]))
    with pytest.raises(FormatError) as err:
        parse_scen(text, g)
    assert err.value.line == 2


def test_components_largest_first():
    g = parse_map(map_text(["..@.", "..@."]))
    assert [len(c) for c in g.components()] == [4, 2]


@st.composite
def grids(draw):
    w, h = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    return [draw(st.text(".@", min_size=w, max_size=w)) for _ in range(h)]


@given(grids())
def test_map_round_trip(rows):
    g = parse_map(map_text(rows))
    again = parse_map(g.to_text())
    assert again.vertices() == g.vertices() and again.edges() == g.edges()


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)), max_size=5))
def test_scen_round_trip(cells):
    g = empty_grid(4, 4)
    rows = [ScenRow(0, "empty-4-4.map", 4, 4, *c, "1") for c in cells]
    assert parse_scen(scen_to_text(rows), g) == rows
