"""MovingAI grid maps and scenario files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path as FsPath

PASSABLE = frozenset(".G")
BLOCKED = frozenset("@OTSW")


class FormatError(ValueError):
    """Malformed map or scenario text; carries the 1-based line (and column)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Grid:
    """A 4-connected grid; vertex id of cell ``(x, y)`` is ``y * width + x``."""

    width: int
    height: int
    rows: tuple  # strings, one per y, "." passable and "@" blocked
    name: str = ""

    def passable(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and self.rows[y][x] in PASSABLE

    def vertex(self, x: int, y: int) -> int:
        return y * self.width + x

    def cell(self, v: int) -> tuple[int, int]:
        return v % self.width, v // self.width

    def vertices(self) -> list[int]:
        return [self.vertex(x, y) for y in range(self.height) for x in range(self.width) if self.passable(x, y)]

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for y in range(self.height):
            for x in range(self.width):
                if not self.passable(x, y):
                    continue
                if self.passable(x + 1, y):
                    out.append((self.vertex(x, y), self.vertex(x + 1, y)))
                if self.passable(x, y + 1):
                    out.append((self.vertex(x, y), self.vertex(x, y + 1)))
        return out

    def components(self) -> list[list[int]]:
        """Connected components, largest first (ties by smallest vertex id)."""
        adj: dict = {v: [] for v in self.vertices()}
        for u, v in self.edges():
            adj[u].append(v)
            adj[v].append(u)
        seen = set()
        comps = []
        for s in sorted(adj):
            if s in seen:
                continue
            seen.add(s)
            comp, stack = [], [s]
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        comps.sort(key=lambda c: (-len(c), c[0]))
        return comps

    def to_text(self) -> str:
        lines = ["type octile", f"height {self.height}", f"width {self.width}", "map", *self.rows]
        return "\n".join(lines) + "\n"


def parse_map(text: str, name: str = "") -> Grid:
    lines = text.splitlines()
    header: dict = {}
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw == "map":
            break
        parts = raw.split()
        if len(parts) != 2 or parts[0] not in ("type", "height", "width"):
            raise FormatError(f"unexpected header line {raw!r}", i)
        header[parts[0]] = parts[1]
    else:
        raise FormatError("missing 'map' line", len(lines))
    for key in ("type", "height", "width"):
        if key not in header:
            raise FormatError(f"missing '{key}' header")
    try:
        height, width = int(header["height"]), int(header["width"])
    except ValueError:
        raise FormatError("height and width must be integers") from None
    if height <= 0 or width <= 0:
        raise FormatError("height and width must be positive")
    body = lines[i : i + height]
    if len(body) < height:
        raise FormatError(f"expected {height} map rows, found {len(body)}", len(lines))
    rows = []
    for r, row in enumerate(body):
        lineno = i + r + 1
        row = row.rstrip("\r\n")
        if len(row) != width:
            raise FormatError(f"row has {len(row)} cells, expected {width}", lineno)
        out = []
        for c, ch in enumerate(row):
            if ch in PASSABLE:
                out.append(".")
            elif ch in BLOCKED:
                out.append("@")
            else:
                raise FormatError(f"unknown glyph {ch!r}", lineno, c + 1)
        rows.append("".join(out))
    for extra, row in enumerate(lines[i + height :]):
        if row.strip():
            raise FormatError("trailing content after map rows", i + height + extra + 1)
    return Grid(width, height, tuple(rows), name)


_EMPTY = re.compile(r"^empty-(\d+)-(\d+)$")


def empty_grid(width: int, height: int) -> Grid:
    return Grid(width, height, tuple("." * width for _ in range(height)), f"empty-{width}-{height}")


def load_map(spec: str) -> Grid:
    """Read a map file, or build ``empty-W-H`` when no such file exists."""
    p = FsPath(spec)
    if p.is_file():
        return parse_map(p.read_text(), p.stem)
    m = _EMPTY.match(p.stem if p.suffix == ".map" else spec)
    if m:
        return empty_grid(int(m.group(1)), int(m.group(2)))
    raise FileNotFoundError(f"no map file {spec!r}")


@dataclass(frozen=True)
class ScenRow:
    bucket: int
    map_name: str
    width: int
    height: int
    sx: int
    sy: int
    gx: int
    gy: int
    optimal: str

    @property
    def start(self) -> tuple[int, int]:
        return self.sx, self.sy

    @property
    def goal(self) -> tuple[int, int]:
        return self.gx, self.gy


def parse_scen(text: str, grid: Grid) -> list[ScenRow]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or (lineno == 1 and line.lower().startswith("version")):
            continue
        parts = raw.rstrip("\r\n").split("\t")
        if len(parts) != 9:
            parts = line.split()
        if len(parts) != 9:
            raise FormatError(f"expected 9 fields, found {len(parts)}", lineno)
        try:
            bucket, w, h, sx, sy, gx, gy = (int(parts[k]) for k in (0, 2, 3, 4, 5, 6, 7))
        except ValueError:
            raise FormatError("non-integer field", lineno) from None
        if (w, h) != (grid.width, grid.height):
            raise FormatError(f"scenario is for a {w}x{h} map, map is {grid.width}x{grid.height}", lineno)
        for x, y, what in ((sx, sy, "start"), (gx, gy, "goal")):
            if not (0 <= x < grid.width and 0 <= y < grid.height):
                raise FormatError(f"{what} ({x}, {y}) out of bounds", lineno)
            if not grid.passable(x, y):
                raise FormatError(f"{what} ({x}, {y}) is blocked", lineno)
        out.append(ScenRow(bucket, parts[1], w, h, sx, sy, gx, gy, parts[8]))
    return out


def scen_to_text(rows: list[ScenRow]) -> str:
    lines = ["version 1"]
    for r in rows:
        fields = (r.bucket, r.map_name, r.width, r.height, r.sx, r.sy, r.gx, r.gy, r.optimal)
        lines.append("\t".join(str(f) for f in fields))
    return "\n".join(lines) + "\n"
