"""Region geometry, patch grids, and adjacency ingestion.

The spatial pipeline turns a GeoJSON region into a rectangular grid of
patches (cells whose center falls inside the region), derives a neighbor
relation (Moore 8-connected or von Neumann 4-connected), and reads/writes
adjacency CSV files so a model can also be assembled over user-supplied
graphs such as county adjacency lists.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .core import is_identifier
from .errors import (AsymmetryError, EmptyGridError, FormatError,
                     IdentifierError, ParseError, ShapeError)

Point = tuple[float, float]
Ring = tuple[Point, ...]

MOORE = "moore"
VON_NEUMANN = "von_neumann"

_OFFSETS = {
    MOORE: ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)),
    VON_NEUMANN: ((-1, 0), (0, -1), (0, 1), (1, 0)),
}


def _check_ring(ring: Ring, what: str) -> Ring:
    ring = tuple((float(x), float(y)) for x, y in ring)
    if len(ring) < 4:
        raise FormatError(f"{what} must have >= 4 vertices including closure, got {len(ring)}")
    if ring[0] != ring[-1]:
        raise FormatError(f"{what} is not closed (first vertex != last)")
    return ring


@dataclass(frozen=True)
class RegionPolygon:
    """A polygon as closed rings: one exterior, zero or more holes."""

    exterior: Ring
    holes: tuple[Ring, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "exterior", _check_ring(self.exterior, "exterior ring"))
        object.__setattr__(self, "holes",
                           tuple(_check_ring(r, "hole ring") for r in self.holes))

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.exterior]
        ys = [p[1] for p in self.exterior]
        return min(xs), min(ys), max(xs), max(ys)


def ring_area(ring: Ring) -> float:
    """Unsigned shoelace area of a closed ring."""
    acc = 0.0
    for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
        acc += x0 * y1 - x1 * y0
    return abs(acc) / 2.0


@dataclass(frozen=True)
class Patch:
    patch_id: str
    row: int
    col: int
    center: Point


@dataclass(frozen=True)
class PatchGrid:
    """Grid cells kept from a region, ordered row-major from the origin."""

    patches: tuple[Patch, ...]
    cell_size: float
    origin: Point

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        seen_ids = set()
        seen_rc = set()
        ox, oy = self.origin
        for p in self.patches:
            if p.patch_id != f"p_{p.row}_{p.col}":
                raise IdentifierError(
                    f"patch id {p.patch_id!r} does not match p_{p.row}_{p.col}")
            if p.patch_id in seen_ids or (p.row, p.col) in seen_rc:
                raise IdentifierError(f"duplicate patch {p.patch_id!r}")
            seen_ids.add(p.patch_id)
            seen_rc.add((p.row, p.col))
            expected = (ox + (p.col + 0.5) * self.cell_size,
                        oy + (p.row + 0.5) * self.cell_size)
            if p.center != expected:
                raise ValueError(f"patch {p.patch_id!r} center {p.center} != {expected}")

    def by_row_col(self) -> dict[tuple[int, int], str]:
        return {(p.row, p.col): p.patch_id for p in self.patches}

    def ids(self) -> tuple[str, ...]:
        return tuple(p.patch_id for p in self.patches)


def _normalize_edge(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Adjacency:
    """Symmetric, loop-free neighbor relation over patch ids.

    Edges are stored as sorted id pairs, so symmetry holds by construction.
    """

    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        seen = set()
        for n in self.nodes:
            if not is_identifier(n):
                raise IdentifierError(f"invalid node id {n!r}")
            if n in seen:
                raise IdentifierError(f"duplicate node id {n!r}")
            seen.add(n)
        normalized = set()
        for e in self.edges:
            a, b = e
            if a == b:
                raise ValueError(f"self-loop on {a!r} not allowed")
            if a not in seen or b not in seen:
                raise IdentifierError(f"edge {e} references undeclared node")
            normalized.add(_normalize_edge(a, b))
        object.__setattr__(self, "edges", frozenset(normalized))

    def degree(self, node: str) -> int:
        return sum(1 for e in self.edges if node in e)

    def neighbors_of(self, node: str) -> list[str]:
        out = [b if a == node else a for a, b in self.edges if node in (a, b)]
        return sorted(out)


def load_region(text: str) -> RegionPolygon:
    """Parse a GeoJSON Feature/FeatureCollection into a RegionPolygon.

    Only Polygon and MultiPolygon geometries are supported; a MultiPolygon
    keeps its largest-area component.  Malformed JSON reports the byte
    offset of the failure.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed GeoJSON: {exc.msg}", offset=exc.pos) from exc
    geometry = _first_geometry(doc)
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if coords is None:
        raise FormatError("geometry has no coordinates")
    if gtype == "Polygon":
        polys = [coords]
    elif gtype == "MultiPolygon":
        polys = list(coords)
        if not polys:
            raise FormatError("MultiPolygon has no components")
    else:
        raise FormatError(f"unsupported geometry type {gtype!r}")
    best = max(polys, key=lambda rings: ring_area(tuple(map(tuple, rings[0]))))
    exterior = tuple(map(tuple, best[0]))
    holes = tuple(tuple(map(tuple, ring)) for ring in best[1:])
    return RegionPolygon(exterior, holes)


def _first_geometry(doc) -> dict:
    if not isinstance(doc, dict):
        raise FormatError("GeoJSON root must be an object")
    kind = doc.get("type")
    if kind == "FeatureCollection":
        features = doc.get("features") or []
        if not features:
            raise FormatError("FeatureCollection has no features")
        return _first_geometry(features[0])
    if kind == "Feature":
        geometry = doc.get("geometry")
        if not isinstance(geometry, dict):
            raise FormatError("Feature has no geometry")
        return geometry
    if kind in ("Polygon", "MultiPolygon"):
        return doc
    raise FormatError(f"unsupported geometry type {kind!r}")


def _on_segment(pt: Point, a: Point, b: Point) -> bool:
    (px, py), (ax, ay), (bx, by) = pt, a, b
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def point_in_polygon(pt: Point, poly: RegionPolygon) -> bool:
    """Even-odd ray-casting test; points on any ring edge count as inside."""
    rings = (poly.exterior,) + poly.holes
    for ring in rings:
        for a, b in zip(ring, ring[1:]):
            if _on_segment(pt, a, b):
                return True
    px, py = pt
    inside = False
    for ring in rings:
        for (ax, ay), (bx, by) in zip(ring, ring[1:]):
            if (ay > py) == (by > py):
                continue
            # x-coordinate where the edge crosses the horizontal through pt
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if x_cross > px:
                inside = not inside
    return inside


def grid_from_region(poly: RegionPolygon, cell_size: float) -> PatchGrid:
    """Lay a grid over the bounding box; keep cells whose center is inside.

    Patches are ordered row-major from the lower-left origin and named
    ``p_<row>_<col>``.  Raises EmptyGridError when no cell qualifies.
    """
    if cell_size <= 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    minx, miny, maxx, maxy = poly.bounds()
    if maxx <= minx or maxy <= miny:
        raise ValueError("polygon bounding box is degenerate")
    n_cols = math.ceil((maxx - minx) / cell_size)
    n_rows = math.ceil((maxy - miny) / cell_size)
    patches = []
    for row in range(n_rows):
        cy = miny + (row + 0.5) * cell_size
        for col in range(n_cols):
            cx = minx + (col + 0.5) * cell_size
            if point_in_polygon((cx, cy), poly):
                patches.append(Patch(f"p_{row}_{col}", row, col, (cx, cy)))
    if not patches:
        raise EmptyGridError(
            f"no cell center of size {cell_size} falls inside the region")
    return PatchGrid(tuple(patches), cell_size, (minx, miny))


def neighbors(grid: PatchGrid, mode: str = MOORE) -> Adjacency:
    """Adjacency between grid cells present in the grid.

    ``moore`` connects cells differing by at most 1 in both row and col;
    ``von_neumann`` connects cells at Manhattan distance 1.
    """
    if mode not in _OFFSETS:
        raise ValueError(f"mode must be one of {sorted(_OFFSETS)}, got {mode!r}")
    if not grid.patches:
        raise ValueError("grid is empty")
    by_rc = grid.by_row_col()
    edges = set()
    for p in grid.patches:
        for dr, dc in _OFFSETS[mode]:
            other = by_rc.get((p.row + dr, p.col + dc))
            if other is not None:
                edges.add(_normalize_edge(p.patch_id, other))
    return Adjacency(grid.ids(), frozenset(edges))


def load_adjacency_csv(text: str) -> Adjacency:
    """Read an adjacency from CSV: square 0/1 matrix or source/target edges.

    The matrix form has a header row and a leading column of ids and must
    be symmetric with an ignored diagonal.  The edge-list form has header
    ``source,target``; nodes are the sorted union of the endpoints.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise FormatError("adjacency CSV is empty")
    header = [c.strip() for c in rows[0]]
    if header == ["source", "target"]:
        return _load_edge_list(rows[1:])
    return _load_matrix(header, rows[1:])


def _load_edge_list(rows: list[list[str]]) -> Adjacency:
    edges = set()
    nodes = set()
    for line_no, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise ShapeError(f"edge list row {line_no} must have 2 fields, got {len(row)}")
        a, b = row[0].strip(), row[1].strip()
        for name in (a, b):
            if not is_identifier(name):
                raise IdentifierError(
                    f"unknown id {name!r} on row {line_no}: not a valid patch identifier")
        nodes.update((a, b))
        if a != b:
            edges.add(_normalize_edge(a, b))
    return Adjacency(tuple(sorted(nodes)), frozenset(edges))


def _load_matrix(header: list[str], rows: list[list[str]]) -> Adjacency:
    col_ids = header[1:]
    if not col_ids:
        raise ShapeError("adjacency matrix has no id columns")
    for name in col_ids:
        if not is_identifier(name):
            raise IdentifierError(f"invalid matrix id {name!r}")
    if len(rows) != len(col_ids):
        raise ShapeError(
            f"matrix is not square: {len(col_ids)} columns but {len(rows)} rows")
    values: dict[tuple[str, str], int] = {}
    row_ids = []
    for line_no, row in enumerate(rows, start=2):
        row = [c.strip() for c in row]
        if len(row) != len(col_ids) + 1:
            raise ShapeError(
                f"matrix row {line_no} has {len(row)} fields, expected {len(col_ids) + 1}")
        row_ids.append(row[0])
        for col_id, cell in zip(col_ids, row[1:]):
            if cell not in ("0", "1"):
                raise FormatError(f"matrix entry on row {line_no} must be 0 or 1, got {cell!r}")
            values[(row[0], col_id)] = int(cell)
    if row_ids != col_ids:
        raise ShapeError("matrix row ids do not match column ids")
    edges = set()
    for a in col_ids:
        for b in col_ids:
            if a == b:
                continue  # diagonal ignored
            if values[(a, b)] != values[(b, a)]:
                raise AsymmetryError(f"asymmetric entries for pair ({a}, {b})")
            if values[(a, b)] == 1:
                edges.add(_normalize_edge(a, b))
    return Adjacency(tuple(col_ids), frozenset(edges))


def write_adjacency_csv(adj: Adjacency) -> str:
    """Emit the matrix form: ids sorted ascending, diagonal zero, LF lines."""
    ids = sorted(adj.nodes)
    edge_set = adj.edges
    lines = ["id," + ",".join(ids)]
    for a in ids:
        cells = ["1" if a != b and _normalize_edge(a, b) in edge_set else "0"
                 for b in ids]
        lines.append(a + "," + ",".join(cells))
    return "\n".join(lines) + "\n"
