"""Minimum-rectangle partition of rectilinear cell regions.

A region is a 4-connected set of unit grid cells, possibly with holes.
The partition follows the classical independent-chord construction:

1. collect the concave (270 degree) vertices of the boundary, including
   the corners of hole rings that are concave with respect to the
   region interior;
2. build every axis-aligned chord joining two co-linear concave
   vertices whose open interior stays strictly inside the region (a
   chord may never run along or across a hole);
3. take a maximum independent set of chords: horizontal and vertical
   chords form the two sides of a bipartite graph with edges between
   intersecting chords, so a maximum matching plus the Koenig vertex
   cover construction yields the complement exactly;
4. draw the chosen chords, then from every concave vertex still
   unresolved extend a cut (vertical first, horizontal if the vertical
   step is already blocked) until it meets a chord, an earlier cut or
   the boundary.

The faces of the resulting subdivision are the output rectangles.  For
hole-free regions the construction is minimum and satisfies
|rects| = #concave - #independent chords + 1; with holes it is a
near-minimal heuristic.

Coordinates: cell (r, c) spans lattice vertices (r, c) to (r+1, c+1).
A horizontal unit edge (y, x) runs from vertex (y, x) to (y, x+1); a
vertical unit edge (y, x) runs from (y, x) to (y+1, x).
"""

from dataclasses import dataclass
from functools import cached_property

from .errors import RegionError

# quadrants around a lattice vertex (y, x), as cell offsets
_UL = (-1, -1)
_UR = (-1, 0)
_LL = (0, -1)
_LR = (0, 0)


@dataclass(frozen=True)
class Rect:
    row0: int
    col0: int
    h: int
    w: int

    @property
    def area(self):
        return self.h * self.w

    @property
    def row1(self):
        return self.row0 + self.h

    @property
    def col1(self):
        return self.col0 + self.w

    def cells(self):
        for r in range(self.row0, self.row1):
            for c in range(self.col0, self.col1):
                yield (r, c)

    def cell_set(self):
        return frozenset(self.cells())

    def contains(self, other):
        return (
            self.row0 <= other.row0
            and self.col0 <= other.col0
            and self.row1 >= other.row1
            and self.col1 >= other.col1
        )

    def intersection(self, other):
        r0 = max(self.row0, other.row0)
        c0 = max(self.col0, other.col0)
        r1 = min(self.row1, other.row1)
        c1 = min(self.col1, other.col1)
        if r0 < r1 and c0 < c1:
            return Rect(r0, c0, r1 - r0, c1 - c0)
        return None


@dataclass(frozen=True)
class Chord:
    orientation: str  # "h" or "v"
    a: tuple  # (row, col) lattice vertex, a < b
    b: tuple

    def intersects(self, other):
        """Closed intersection test; sharing an endpoint counts."""
        if self.orientation == other.orientation:
            return False
        h, v = (self, other) if self.orientation == "h" else (other, self)
        y = h.a[0]
        x = v.a[1]
        return h.a[1] <= x <= h.b[1] and v.a[0] <= y <= v.b[0]


class RectilinearRegion:
    """A 4-connected set of grid cells; raises on disconnected input."""

    def __init__(self, cells):
        cells = frozenset((int(r), int(c)) for r, c in cells)
        if not cells:
            raise RegionError("region has no cells")
        self.cells = cells
        if not self._connected():
            raise RegionError("region is not 4-connected")

    def _connected(self):
        start = next(iter(self.cells))
        seen = {start}
        stack = [start]
        while stack:
            r, c = stack.pop()
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in self.cells and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.cells)

    @cached_property
    def bounding_box(self):
        rows = [r for r, _ in self.cells]
        cols = [c for _, c in self.cells]
        return Rect(min(rows), min(cols), max(rows) - min(rows) + 1, max(cols) - min(cols) + 1)

    @cached_property
    def boundary_edges(self):
        """Unit edges separating the region from its complement."""
        h_edges, v_edges = set(), set()
        for r, c in self.cells:
            if (r - 1, c) not in self.cells:
                h_edges.add((r, c))
            if (r + 1, c) not in self.cells:
                h_edges.add((r + 1, c))
            if (r, c - 1) not in self.cells:
                v_edges.add((r, c))
            if (r, c + 1) not in self.cells:
                v_edges.add((r, c + 1))
        return h_edges, v_edges

    @cached_property
    def hole_cells(self):
        """Bounded complement components, each a frozenset of cells."""
        bb = self.bounding_box
        outside = set()
        stack = []
        for r in range(bb.row0 - 1, bb.row1 + 1):
            for c in (bb.col0 - 1, bb.col1):
                stack.append((r, c))
        for c in range(bb.col0 - 1, bb.col1 + 1):
            for r in (bb.row0 - 1, bb.row1):
                stack.append((r, c))
        outside.update(stack)
        while stack:
            r, c = stack.pop()
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                rr, cc = nb
                if not (bb.row0 - 1 <= rr <= bb.row1 and bb.col0 - 1 <= cc <= bb.col1):
                    continue
                if nb in self.cells or nb in outside:
                    continue
                outside.add(nb)
                stack.append(nb)
        enclosed = [
            (r, c)
            for r in range(bb.row0, bb.row1)
            for c in range(bb.col0, bb.col1)
            if (r, c) not in self.cells and (r, c) not in outside
        ]
        holes = []
        remaining = set(enclosed)
        while remaining:
            seed = min(remaining)
            comp = {seed}
            stack = [seed]
            while stack:
                r, c = stack.pop()
                for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if nb in remaining and nb not in comp:
                        comp.add(nb)
                        stack.append(nb)
            remaining -= comp
            holes.append(frozenset(comp))
        holes.sort(key=min)
        return holes


def regions_from_cells(cells):
    """Split an arbitrary cell set into its 4-connected regions."""
    remaining = set((int(r), int(c)) for r, c in cells)
    regions = []
    while remaining:
        seed = min(remaining)
        comp = {seed}
        stack = [seed]
        while stack:
            r, c = stack.pop()
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in remaining and nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        remaining -= comp
        regions.append(RectilinearRegion(comp))
    regions.sort(key=lambda reg: min(reg.cells))
    return regions


def _vertex_quadrants(region):
    """Map each concave lattice vertex to its single missing quadrant."""
    counts = {}
    for r, c in region.cells:
        for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
            counts[(r + dy, c + dx)] = counts.get((r + dy, c + dx), 0) + 1
    out = {}
    for (y, x), n in counts.items():
        if n != 3:
            continue
        for quad in (_UL, _UR, _LL, _LR):
            if (y + quad[0], x + quad[1]) not in region.cells:
                out[(y, x)] = quad
                break
    return out


def concave_vertices(region):
    """Concave boundary vertices (outer ring and hole rings), sorted."""
    return sorted(_vertex_quadrants(region))


def _h_span_inside(region, y, x1, x2):
    cells = region.cells
    return all((y - 1, x) in cells and (y, x) in cells for x in range(x1, x2))


def _v_span_inside(region, x, y1, y2):
    cells = region.cells
    return all((y, x - 1) in cells and (y, x) in cells for y in range(y1, y2))


def build_chords(region, vertices=None):
    """All valid chords between co-linear concave vertex pairs."""
    if vertices is None:
        vertices = concave_vertices(region)
    by_row, by_col = {}, {}
    for v in vertices:
        by_row.setdefault(v[0], []).append(v)
        by_col.setdefault(v[1], []).append(v)
    chords = []
    for y in sorted(by_row):
        vs = sorted(by_row[y])
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                if _h_span_inside(region, y, vs[i][1], vs[j][1]):
                    chords.append(Chord("h", vs[i], vs[j]))
    for x in sorted(by_col):
        vs = sorted(by_col[x])
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                if _v_span_inside(region, x, vs[i][0], vs[j][0]):
                    chords.append(Chord("v", vs[i], vs[j]))
    chords.sort(key=lambda ch: (ch.orientation, ch.a, ch.b))
    return chords


def max_independent_chords(chords):
    """Maximum set of pairwise non-intersecting chords.

    Horizontal and vertical chords are the two sides of a bipartite
    graph; a maximum matching (augmenting paths) plus the Koenig
    alternating-reachability construction gives a minimum vertex cover,
    whose complement is the answer.
    """
    hs = [ch for ch in chords if ch.orientation == "h"]
    vs = [ch for ch in chords if ch.orientation == "v"]
    adj = [[j for j, v in enumerate(vs) if h.intersects(v)] for h in hs]

    match_v = [None] * len(vs)
    match_h = [None] * len(hs)

    def augment(i, visited):
        for j in adj[i]:
            if j in visited:
                continue
            visited.add(j)
            if match_v[j] is None or augment(match_v[j], visited):
                match_v[j] = i
                match_h[i] = j
                return True
        return False

    for i in range(len(hs)):
        augment(i, set())

    # Koenig: alternating reachability from unmatched horizontal chords
    reach_h = {i for i in range(len(hs)) if match_h[i] is None}
    reach_v = set()
    frontier = list(reach_h)
    while frontier:
        i = frontier.pop()
        for j in adj[i]:
            if j in reach_v:
                continue
            if match_h[i] == j:
                continue
            reach_v.add(j)
            k = match_v[j]
            if k is not None and k not in reach_h:
                reach_h.add(k)
                frontier.append(k)

    chosen = [hs[i] for i in sorted(reach_h)]
    chosen += [vs[j] for j in range(len(vs)) if j not in reach_v]
    chosen.sort(key=lambda ch: (ch.orientation, ch.a, ch.b))
    return chosen


class _Walls:
    def __init__(self, region):
        h_edges, v_edges = region.boundary_edges
        self.h = set(h_edges)
        self.v = set(v_edges)
        self.cells = region.cells

    def add_chord(self, chord):
        if chord.orientation == "h":
            y = chord.a[0]
            for x in range(chord.a[1], chord.b[1]):
                self.h.add((y, x))
        else:
            x = chord.a[1]
            for y in range(chord.a[0], chord.b[0]):
                self.v.add((y, x))

    def wall_count_at(self, y, x):
        n = 0
        if (y - 1, x) in self.v:
            n += 1
        if (y, x) in self.v:
            n += 1
        if (y, x - 1) in self.h:
            n += 1
        if (y, x) in self.h:
            n += 1
        return n

    def carve_vertical(self, y, x, dy):
        steps = 0
        while True:
            edge = (y - 1, x) if dy < 0 else (y, x)
            side = ((edge[0], x - 1), (edge[0], x))
            if side[0] not in self.cells or side[1] not in self.cells:
                break  # boundary or hole ahead
            if edge in self.v:
                break  # met a collinear wall
            self.v.add(edge)
            steps += 1
            y += dy
            if (y, x - 1) in self.h or (y, x) in self.h:
                break  # met a perpendicular wall
        return steps

    def carve_horizontal(self, y, x, dx):
        steps = 0
        while True:
            edge = (y, x - 1) if dx < 0 else (y, x)
            side = ((y - 1, edge[1]), (y, edge[1]))
            if side[0] not in self.cells or side[1] not in self.cells:
                break
            if edge in self.h:
                break
            self.h.add(edge)
            steps += 1
            x += dx
            if (y - 1, x) in self.v or (y, x) in self.v:
                break
        return steps


# interior cut directions per missing quadrant: (vertical dy, horizontal dx)
_CUT_DIRECTIONS = {
    _UL: (1, 1),   # boundary runs up/left, interior is down/right
    _UR: (1, -1),
    _LL: (-1, 1),
    _LR: (-1, -1),
}


def partition(region):
    """Split the region into disjoint rectangles covering it exactly."""
    if not isinstance(region, RectilinearRegion):
        region = RectilinearRegion(region)
    quadrants = _vertex_quadrants(region)
    vertices = sorted(quadrants)
    chords = build_chords(region, vertices)
    chosen = max_independent_chords(chords)

    walls = _Walls(region)
    resolved = set()
    for chord in chosen:
        walls.add_chord(chord)
        resolved.add(chord.a)
        resolved.add(chord.b)

    for v in vertices:
        if v in resolved:
            continue
        y, x = v
        if walls.wall_count_at(y, x) > 2:
            continue  # an earlier cut terminated here and already split the corner
        dy, dx = _CUT_DIRECTIONS[quadrants[v]]
        if walls.carve_vertical(y, x, dy) == 0:
            walls.carve_horizontal(y, x, dx)

    rects = _faces(region, walls)
    rects.sort(key=lambda rc: (rc.row0, rc.col0))
    return rects


def _faces(region, walls):
    seen = set()
    rects = []
    for seed in sorted(region.cells):
        if seed in seen:
            continue
        comp = {seed}
        stack = [seed]
        while stack:
            r, c = stack.pop()
            if (r - 1, c) in region.cells and (r, c) not in walls.h and (r - 1, c) not in comp:
                comp.add((r - 1, c))
                stack.append((r - 1, c))
            if (r + 1, c) in region.cells and (r + 1, c) not in walls.h and (r + 1, c) not in comp:
                comp.add((r + 1, c))
                stack.append((r + 1, c))
            if (r, c - 1) in region.cells and (r, c) not in walls.v and (r, c - 1) not in comp:
                comp.add((r, c - 1))
                stack.append((r, c - 1))
            if (r, c + 1) in region.cells and (r, c + 1) not in walls.v and (r, c + 1) not in comp:
                comp.add((r, c + 1))
                stack.append((r, c + 1))
        seen |= comp
        rows = [r for r, _ in comp]
        cols = [c for _, c in comp]
        rect = Rect(min(rows), min(cols), max(rows) - min(rows) + 1, max(cols) - min(cols) + 1)
        if rect.area != len(comp):
            raise RegionError(f"partition produced a non-rectangular face at {rect}")
        rects.append(rect)
    return rects
