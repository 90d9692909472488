"""Shared random generators and independent oracles for the test suite.

Everything takes an explicit random.Random so each test controls its own
seed; nothing here touches the global RNG state.
"""

import itertools
from fractions import Fraction

from flatchains import (
    BoxCell,
    BoxChain,
    Complex,
    CurveSystem,
    Simplex,
    SimplicialChain,
    arrangement_complex,
    grid_chain,
)

# ---------------------------------------------------------------------------
# box chains


def fraction_coord(rng, denom=4, lo=0, hi=2):
    return Fraction(rng.randint(lo * denom, hi * denom), denom)


def random_box_cell(rng, n, k, denom=4, lo=0, hi=2):
    dirs = set(rng.sample(range(n), k))
    intervals = []
    for j in range(n):
        if j in dirs:
            a = fraction_coord(rng, denom, lo, hi)
            b = fraction_coord(rng, denom, lo, hi)
            while b == a:
                b = fraction_coord(rng, denom, lo, hi)
            intervals.append((min(a, b), max(a, b)))
        else:
            v = fraction_coord(rng, denom, lo, hi)
            intervals.append((v, v))
    return BoxCell(tuple(intervals))


def random_box_chain(rng, n, k, max_cells=3, denom=4, lo=0, hi=2,
                     coeff=3, nonzero=False):
    while True:
        items = [(random_box_cell(rng, n, k, denom, lo, hi),
                  rng.choice([g for g in range(-coeff, coeff + 1) if g]))
                 for _ in range(rng.randint(1, max_cells))]
        chain = BoxChain(n, k, items)
        if not (nonzero and chain.is_zero()):
            return chain


def generic_level(rng, chain, axis, extra=()):
    """A level strictly between two consecutive coordinate values.

    extra lists further values the level must avoid (e.g. a previously
    drawn level on the same axis).
    """
    vals = sorted(set(chain.axis_values(axis)) | {Fraction(v) for v in extra})
    if not vals:
        return Fraction(rng.randint(1, 7), 8)
    if len(vals) == 1:
        lo, hi = vals[0] - 1, vals[0] + 1
    else:
        i = rng.randrange(len(vals) - 1)
        lo, hi = vals[i], vals[i + 1]
    return lo + (hi - lo) * Fraction(rng.choice([1, 3, 5, 7]), 8)


def cross_section(chain, axis, r):
    """Geometric slice oracle: cut each box crossing the hyperplane.

    Sign rule: the section of a cell inherits the cell's coefficient
    times (-1)**(number of cell directions below the slicing axis).
    """
    r = Fraction(r)
    items = []
    for cell, g in chain.items():
        lo, hi = cell.intervals[axis]
        if not lo < r < hi:
            continue
        below = sum(1 for d in cell.directions if d < axis)
        sign = 1 if below % 2 == 0 else -1
        items.append((cell.replace(axis, r, r), sign * g))
    return BoxChain(chain.ambient_dim, chain.dim - 1, items)


# ---------------------------------------------------------------------------
# abstract complexes


def path_complex(volumes):
    """Points q0..qm joined by edges e1..em with the given lengths."""
    vols = list(volumes)
    return Complex({
        0: [(f"q{i}", 1, []) for i in range(len(vols) + 1)],
        1: [(f"e{i}", v, [(f"q{i - 1}", -1), (f"q{i}", 1)])
            for i, v in enumerate(vols, start=1)],
    })


GRID_SHAPES_2D = [(2, 2), (3, 2), (2, 3), (4, 2), (1, 4), (1, 6), (3, 1)]
GRID_SHAPES_3D = [(2, 2, 2), (1, 2, 2), (2, 1, 2), (1, 1, 3)]


def random_grid_complex(rng, float_volumes=False, small=False):
    """A full box-lattice complex with at most 8 top-dimensional cells."""
    if small:
        shape = rng.choice([(2, 2), (1, 4), (2, 1), (1, 3)])
    elif rng.random() < 0.75:
        shape = rng.choice(GRID_SHAPES_2D)
    else:
        shape = rng.choice(GRID_SHAPES_3D)
    n = len(shape)
    full = grid_chain(n, n, [(0, s) for s in shape], 1)
    cx, _ = arrangement_complex(full)
    if float_volumes:
        cx = rescale_volumes(cx, rng)
    return cx


def rescale_volumes(cx, rng):
    """Copy a complex with random real volumes on the positive-dim cells."""
    layout = {}
    for d in cx.dims():
        rows = []
        for cid in cx.cells(d):
            vol = cx.volume(cid) if d == 0 else float(cx.volume(cid)) * rng.uniform(0.5, 2.5)
            rows.append((cid, vol, sorted(cx.boundary_of(cid).items())))
        layout[d] = rows
    return Complex(layout)


def random_chain_on(rng, cx, dim, max_cells=5, coeff=6, nonzero=False):
    cells = cx.cells(dim)
    while True:
        picked = rng.sample(cells, min(len(cells), rng.randint(1, max_cells)))
        coeffs = {cid: rng.choice([g for g in range(-coeff, coeff + 1) if g])
                  for cid in picked}
        chain = cx.chain(dim, coeffs)
        if not (nonzero and chain.is_zero()):
            return chain


# ---------------------------------------------------------------------------
# curve systems


def _mass(rng):
    return Fraction(rng.randint(1, 12), 4)


def random_curve_system(rng, p, max_groups=4, point_pool=6):
    """A curve system whose boundary is divisible by p, by construction.

    Groups: parallel bundles with congruent forward/reverse counts, sink
    fans (p copies per source), closed polygons, concatenation chains
    duplicated p times, and plain loops.
    """
    pts = [f"v{i}" for i in range(point_pool)]
    triples = []
    for _ in range(rng.randint(0, max_groups)):
        style = rng.random()
        if style < 0.12:
            v = rng.choice(pts)
            triples.append((v, v, _mass(rng)))
        elif style < 0.32:
            a, b = rng.sample(pts, 2)
            qf = rng.randint(0, 2)
            qr = qf + p * rng.randint(0, 1)
            if rng.random() < 0.5:
                qf, qr = qr, qf
            if qf == 0 and qr == 0:
                qf = qr = 1
            triples += [(a, b, _mass(rng)) for _ in range(qf)]
            triples += [(b, a, _mass(rng)) for _ in range(qr)]
        elif style < 0.62:
            sink = rng.choice(pts)
            sources = [v for v in pts if v != sink]
            for src in rng.sample(sources, rng.randint(1, 3)):
                triples += [(src, sink, _mass(rng)) for _ in range(p)]
        elif style < 0.82:
            cycle = rng.sample(pts, rng.randint(3, min(4, point_pool)))
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                triples.append((a, b, _mass(rng)))
        else:
            walk = rng.sample(pts, rng.randint(3, 4))
            for _ in range(p):
                for a, b in itertools.pairwise(walk):
                    triples.append((a, b, _mass(rng)))
    rng.shuffle(triples)
    return CurveSystem.from_triples(triples, p=p)


# ---------------------------------------------------------------------------
# simplicial chains


def random_point(rng, n, denom=2, lo=-3, hi=3):
    return tuple(Fraction(rng.randint(lo * denom, hi * denom), denom)
                 for _ in range(n))


def random_simplex(rng, n, k, denom=2):
    while True:
        s = Simplex(tuple(random_point(rng, n, denom) for _ in range(k + 1)))
        if k == 0 or not s.degenerate:
            return s


def random_simplicial_chain(rng, n, k, max_cells=3, coeff=3):
    items = [(random_simplex(rng, n, k),
              rng.choice([g for g in range(-coeff, coeff + 1) if g]))
             for _ in range(rng.randint(1, max_cells))]
    return SimplicialChain(n, k, items)


def generic_apex(rng, T):
    """An apex whose join with every cell of T is nondegenerate."""
    for _ in range(64):
        x = random_point(rng, T.ambient_dim, denom=7, lo=-4, hi=4)
        if all(Simplex((x,) + s.vertices).degenerate is False
               for s, _ in T.items()):
            return x
    raise AssertionError("no generic apex found in 64 draws")
