"""Independent test oracles: brute-force minimum partition and shape enumeration.

Kept apart from the package on purpose; nothing here shares logic with
the implementation under test.

Shapes are encoded as uint64 bitmasks over an 8x8 window whose usable
interior is rows 1..6 x cols 1..6; bit index = row * 8 + col.  The one
cell margin lets vectorized shifts run without wrapping.
"""

import numpy as np

WINDOW = 8

ROW = [np.uint64(sum(1 << (r * WINDOW + c) for c in range(WINDOW))) for r in range(WINDOW)]
COL = [np.uint64(sum(1 << (r * WINDOW + c) for r in range(WINDOW))) for c in range(WINDOW)]
INTERIOR = np.uint64(sum(1 << (r * WINDOW + c) for r in range(1, 7) for c in range(1, 7)))
INTERIOR_BORDER = np.uint64(
    sum(
        1 << (r * WINDOW + c)
        for r in range(1, 7)
        for c in range(1, 7)
        if r in (1, 6) or c in (1, 6)
    )
)

_ONE = np.uint64(1)
_EIGHT = np.uint64(8)
_OUTSIDE = ROW[0] | ROW[7] | COL[0] | COL[7]


def cells_to_mask(cells):
    m = 0
    for r, c in cells:
        m |= 1 << ((r + 1) * WINDOW + (c + 1))
    return np.uint64(m)


def mask_to_cells(mask):
    mask = int(mask)
    return [
        (r - 1, c - 1)
        for r in range(WINDOW)
        for c in range(WINDOW)
        if mask >> (r * WINDOW + c) & 1
    ]


def _dilate(masks):
    return masks | masks >> _ONE | masks << _ONE | masks >> _EIGHT | masks << _EIGHT


def enumerate_shapes(max_cells):
    """All 4-connected shapes of 1..max_cells cells fitting a 6x6 box.

    Canonical up to translation (each shape touches window row 1 and
    col 1).  Returns {size: sorted np.ndarray of uint64 masks}.
    """
    neighbor = np.zeros(64, dtype=np.uint64)
    for r in range(WINDOW):
        for c in range(WINDOW):
            m = 0
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= rr < WINDOW and 0 <= cc < WINDOW:
                    m |= 1 << (rr * WINDOW + cc)
            neighbor[r * WINDOW + c] = m

    start = np.uint64(1 << (1 * WINDOW + 1))
    out = {1: np.array([start], dtype=np.uint64)}
    for size in range(2, max_cells + 1):
        parents = out[size - 1]
        chunks = []
        for r in range(0, 7):
            for c in range(0, 7):
                p = r * WINDOW + c
                bit = np.uint64(1 << p)
                sel = ((parents & neighbor[p]) != 0) & ((parents & bit) == 0)
                children = parents[sel] | bit
                if not children.size:
                    continue
                if r == 0:
                    # renormalize; a 7-row shape cannot fit and is dropped
                    children = children[(children & ROW[7]) == 0] << _EIGHT
                elif c == 0:
                    children = children[(children & COL[7]) == 0] << _ONE
                children = children[(children & _OUTSIDE) == 0]
                if children.size:
                    chunks.append(children)
        out[size] = (
            np.unique(np.concatenate(chunks)) if chunks else np.array([], dtype=np.uint64)
        )
    return out


def enclosed_complement(masks):
    """Per-mask bitmask of complement cells unreachable from the border."""
    comp = ~masks & INTERIOR
    reached = comp & INTERIOR_BORDER
    while True:
        grown = _dilate(reached) & comp
        if (grown == reached).all():
            return comp & ~reached
        reached = grown


def hole_components(mask):
    """4-connected components of the enclosed complement of one mask."""
    enclosed = int(enclosed_complement(np.array([mask], dtype=np.uint64))[0])
    cells = {
        (r, c)
        for r in range(WINDOW)
        for c in range(WINDOW)
        if enclosed >> (r * WINDOW + c) & 1
    }
    comps = []
    while cells:
        seed = min(cells)
        comp = {seed}
        stack = [seed]
        while stack:
            r, c = stack.pop()
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in cells and nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        cells -= comp
        comps.append(comp)
    return comps


def min_partition_count(cells):
    """Exhaustive minimum number of disjoint rectangles covering `cells`.

    Depth-first search covering the row-major first uncovered cell with
    every rectangle rooted there, memoized on the uncovered-set bitmask.
    Independent of the chord construction under test.
    """
    cells = sorted(cells)
    index = {cell: i for i, cell in enumerate(cells)}
    cell_set = set(cells)
    full = (1 << len(cells)) - 1

    rect_cache = {}

    def rects_at(i):
        cached = rect_cache.get(i)
        if cached is not None:
            return cached
        r0, c0 = cells[i]
        options = []
        max_w = 0
        while (r0, c0 + max_w) in cell_set:
            max_w += 1
        h = 1
        row_mask = [0] * (max_w + 1)  # row_mask[w] for the current height
        while True:
            w = 0
            while w < max_w and (r0 + h - 1, c0 + w) in cell_set:
                w += 1
            max_w = w
            if max_w == 0:
                break
            strip = 0
            for w in range(1, max_w + 1):
                strip |= 1 << index[(r0 + h - 1, c0 + w - 1)]
                row_mask[w] = (row_mask[w] if h > 1 else 0) | strip
                options.append(row_mask[w])
            h += 1
        rect_cache[i] = options
        return options

    memo = {0: 0}

    def solve(uncovered):
        hit = memo.get(uncovered)
        if hit is not None:
            return hit
        first = (uncovered & -uncovered).bit_length() - 1
        best = None
        for rect in rects_at(first):
            if rect & ~uncovered:
                continue
            sub = solve(uncovered & ~rect) + 1
            if best is None or sub < best:
                best = sub
        memo[uncovered] = best
        return best

    return solve(full)
