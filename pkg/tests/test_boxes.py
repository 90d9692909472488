"""Box chains: construction, restriction, slicing, slice-mass integrals."""

import itertools
from fractions import Fraction

import pytest

from flatchains import (
    BoxCell,
    BoxChain,
    PreconditionError,
    arrangement_complex,
    compile_chain,
    grid_chain,
    slice_mass_integral,
    slice_mass_star,
)
from genutil import cross_section, generic_level, random_box_chain


def unit_square():
    return BoxChain(2, 2, [(BoxCell(((0, 1), (0, 1))), 1)])


def cell(*intervals):
    return BoxCell(tuple(intervals))


# ---------------------------------------------------------------------------
# cells and chains

def test_cell_geometry():
    c = cell((0, 1), (Fraction(1, 2), Fraction(1, 2)))
    assert c.dim == 1
    assert c.directions == (0,)
    assert c.volume == 1
    assert cell((0, 2), (0, 3)).volume == 6
    with pytest.raises(PreconditionError, match="reversed"):
        cell((1, 0))


def test_chain_canonicalization_splits_overlaps():
    a = BoxChain(1, 1, [(cell((0, 2)), 1), (cell((1, 3)), 1)])
    assert dict(a.items()) == {cell((0, 1)): 1, cell((1, 2)): 2, cell((2, 3)): 1}
    # equality is about the underlying current, not the box list
    halves = BoxChain(1, 1, [(cell((0, 1)), 1), (cell((1, 2)), 1)])
    assert halves == BoxChain(1, 1, [(cell((0, 2)), 1)])
    assert BoxChain(1, 1, [(cell((0, 1)), 1), (cell((0, 1)), -1)]).is_zero()


def test_chain_construction_rules():
    with pytest.raises(PreconditionError):
        BoxChain(2, 1, [(cell((0, 1), (0, 1)), 1)])  # dim mismatch
    with pytest.raises(PreconditionError):
        BoxChain(1, 1, [(cell((0, 1), (0, 0)), 1)])  # wrong ambient
    with pytest.raises(PreconditionError):
        BoxChain(1, 1, [(cell((0, 1)), Fraction(1, 2))])
    with pytest.raises(PreconditionError):
        2.0 * BoxChain(1, 1, [(cell((0, 1)), 1)])


def test_boundary_signs_of_the_square():
    b = unit_square().boundary()
    assert b.coefficient(cell((1, 1), (0, 1))) == 1   # right
    assert b.coefficient(cell((0, 0), (0, 1))) == -1  # left
    assert b.coefficient(cell((0, 1), (1, 1))) == -1  # top
    assert b.coefficient(cell((0, 1), (0, 0))) == 1   # bottom


def test_boundary_of_boundary_vanishes(rng):
    for _ in range(40):
        n = rng.choice([2, 3])
        k = rng.randint(2, n)
        t = random_box_chain(rng, n, k)
        assert t.boundary().boundary().is_zero()


def test_mass_and_reduction():
    t = BoxChain(1, 1, [(cell((0, 2)), 3), (cell((3, 4)), -5)])
    assert t.mass() == 11
    assert t.mass_p(3) == 2 * 0 + 1 * 1
    assert dict(t.reduce_mod_p(3).items()) == {cell((3, 4)): 1}


# ---------------------------------------------------------------------------
# grid_chain

def test_grid_chain_pinned_examples():
    sq = grid_chain(2, 2, [(0, 1), (0, 1)], 1)
    assert sq == unit_square()
    edges = grid_chain(2, 1, [(0, 1), (0, 1)], 1)
    assert len(edges) == 4 and edges.mass() == 4
    four = grid_chain(2, 2, [(0, 2), (0, 2)], 1)
    assert len(four) == 4 and four.mass() == 4


def test_grid_chain_misaligned_region():
    with pytest.raises(PreconditionError, match="misaligned"):
        grid_chain(2, 2, [(0, Fraction(1, 2)), (0, 1)], 1)


def test_grid_chain_coefficient_callable():
    t = grid_chain(1, 1, [(0, 2)], 1, lambda c: int(c.intervals[0][0]) % 2)
    assert dict(t.items()) == {cell((1, 2)): 1}


# ---------------------------------------------------------------------------
# restriction

def test_restrict_pinned_examples():
    sq = unit_square()
    below = sq.restrict(0, Fraction(1, 2))
    assert below == BoxChain(2, 2, [(cell((0, Fraction(1, 2)), (0, 1)), 1)])
    assert sq.restrict(0, Fraction(-1, 2)).is_zero()
    edge = BoxChain(2, 1, [(cell((0, 0), (0, 1)), 1)])
    assert edge.restrict(0, Fraction(1, 2)) == edge


def test_restrict_rejects_face_levels():
    with pytest.raises(PreconditionError, match="hits a face on axis 0; perturb r"):
        unit_square().restrict(0, 1)
    with pytest.raises(PreconditionError, match="perturb"):
        unit_square().restrict(1, 0)


def test_restrict_level_suggestion_is_usable():
    try:
        unit_square().restrict(0, 0)
    except PreconditionError as err:
        suggested = Fraction(str(err).rsplit("to ", 1)[1].rstrip(")"))
    assert unit_square().restrict(0, suggested) is not None


def test_restrict_additivity(rng):
    for _ in range(60):
        n = rng.choice([2, 3])
        k = rng.randint(0, n)
        t = random_box_chain(rng, n, k)
        axis = rng.randrange(n)
        r = generic_level(rng, t, axis)
        assert t.restrict(axis, r) + t.restrict(axis, r, side="above") == t


def test_restrict_side_argument():
    with pytest.raises(PreconditionError, match="side"):
        unit_square().restrict(0, Fraction(1, 2), side="under")


# ---------------------------------------------------------------------------
# slicing

def test_slice_pinned_examples():
    sq = unit_square()
    half = Fraction(1, 2)
    assert sq.slice(0, half) == BoxChain(2, 1, [(cell((half, half), (0, 1)), 1)])
    assert sq.slice(1, half) == BoxChain(2, 1, [(cell((0, 1), (half, half)), -1)])
    upright = BoxChain(2, 1, [(cell((0, 0), (0, 1)), 1)])
    assert upright.slice(0, half).is_zero()
    flat = BoxChain(2, 1, [(cell((0, 1), (0, 0)), 1)])
    assert flat.slice(0, half) == BoxChain(2, 0, [(cell((half, half), (0, 0)), 1)])


def test_slice_requires_positive_dimension():
    t = BoxChain(1, 0, [(cell((0, 0)), 1)])
    with pytest.raises(PreconditionError):
        t.slice(0, Fraction(1, 2))


def test_slice_matches_geometric_cross_section(rng):
    for _ in range(80):
        n = rng.choice([2, 3])
        k = rng.randint(1, n)
        t = random_box_chain(rng, n, k)
        axis = rng.randrange(n)
        r = generic_level(rng, t, axis)
        assert t.slice(axis, r) == cross_section(t, axis, r)


def test_iterated_slice_pinned_examples():
    sq = unit_square()
    half = Fraction(1, 2)
    point = BoxChain(2, 0, [(cell((half, half), (half, half)), 1)])
    assert sq.iterated_slice((0, 1), (half, half)) == point
    assert sq.iterated_slice((1, 0), (half, half)) == -point
    cube = grid_chain(3, 3, [(0, 1)] * 3, 1)
    got = cube.iterated_slice((0, 1, 2), (half, half, half))
    assert len(got) == 1 and abs(got.items()[0][1]) == 1


def test_iterated_slice_preconditions():
    sq = unit_square()
    with pytest.raises(PreconditionError, match="distinct"):
        sq.iterated_slice((0, 0), (Fraction(1, 4), Fraction(1, 2)))
    with pytest.raises(PreconditionError):
        sq.iterated_slice((0, 1), (Fraction(1, 2),))
    edge = BoxChain(2, 1, [(cell((0, 1), (0, 0)), 1)])
    with pytest.raises(PreconditionError, match="slices"):
        edge.iterated_slice((0, 1), (Fraction(1, 2), Fraction(1, 2)))


def test_boundary_slice_anticommute(rng):
    for _ in range(60):
        n = rng.choice([2, 3])
        k = rng.randint(2, n)
        t = random_box_chain(rng, n, k)
        axis = rng.randrange(n)
        r = generic_level(rng, t, axis)
        assert t.boundary().slice(axis, r) == -(t.slice(axis, r).boundary())


def test_slice_restrict_commute(rng):
    for _ in range(60):
        n = rng.choice([2, 3])
        k = rng.randint(1, n)
        t = random_box_chain(rng, n, k)
        axis = rng.randrange(n)
        u = rng.randrange(n)
        r = generic_level(rng, t, axis)
        s = generic_level(rng, t, u, extra=[r] if u == axis else [])
        lhs = t.restrict(u, s).slice(axis, r)
        rhs = t.slice(axis, r).restrict(u, s)
        if u == axis and s < r:
            # everything below s misses the hyperplane at r
            assert lhs.is_zero() and rhs == t.slice(axis, r).restrict(u, s)
        assert lhs == rhs


def test_slice_order_swap_sign(rng):
    done = 0
    while done < 50:
        n = rng.choice([2, 3])
        k = rng.randint(2, n)
        t = random_box_chain(rng, n, k)
        axes = rng.sample(range(n), 2)
        r = generic_level(rng, t, axes[0])
        s = generic_level(rng, t, axes[1])
        fwd = t.iterated_slice(tuple(axes), (r, s))
        rev = t.iterated_slice(tuple(reversed(axes)), (s, r))
        assert rev == -fwd
        done += 1


def test_slice_group_order_swap_sign_in_r3(rng):
    # groups of sizes (1, 2) on a 3-chain: the swap sign is (-1)**2 = +1
    for _ in range(15):
        t = random_box_chain(rng, 3, 3)
        r0 = generic_level(rng, t, 0)
        r1 = generic_level(rng, t, 1)
        r2 = generic_level(rng, t, 2)
        fwd = t.iterated_slice((0, 1, 2), (r0, r1, r2))
        rev = t.iterated_slice((1, 2, 0), (r1, r2, r0))
        assert rev == fwd


# ---------------------------------------------------------------------------
# slice-mass integrals

def test_slice_mass_integral_pinned_examples():
    sq = unit_square()
    assert slice_mass_integral(sq, (0,), 2) == 1
    assert slice_mass_integral(sq, (0, 1), 2) == 1
    assert slice_mass_integral(3 * sq, (0,), 3) == 0


def test_slice_mass_star_pinned_examples():
    sq = unit_square()
    assert slice_mass_star(sq, 2) == 1 == sq.mass_p(2)
    edge = BoxChain(2, 1, [(cell((0, 1), (0, 0)), 1)])
    assert slice_mass_star(edge, 2) == 1
    assert slice_mass_star(2 * edge, 2) == 0


def test_slice_mass_integral_bounded_by_relaxed_mass(rng):
    for _ in range(60):
        n = rng.choice([2, 3])
        k = rng.randint(1, n)
        t = random_box_chain(rng, n, k, coeff=5)
        p = rng.choice([2, 3, 5])
        for m in range(1, k + 1):
            for axes in itertools.combinations(range(n), m):
                assert slice_mass_integral(t, axes, p) <= t.mass_p(p)
        assert slice_mass_star(t, p) <= t.mass_p(p)


def test_slice_mass_star_gap_can_be_strict():
    # a staircase: two unit edges meeting at a corner
    t = BoxChain(2, 1, [(cell((0, 1), (0, 0)), 1), (cell((1, 1), (0, 1)), 1)])
    star = slice_mass_star(t, 2)
    assert star == 1 < t.mass_p(2)


# ---------------------------------------------------------------------------
# compilation

def test_compile_pinned_examples():
    cx, t = compile_chain(unit_square())
    assert [cx.num_cells(d) for d in (0, 1, 2)] == [4, 4, 1]
    assert cx.validate().ok
    assert t.mass() == 1

    two = grid_chain(2, 2, [(0, 2), (0, 1)], 1)
    cx2, _ = compile_chain(two)
    assert cx2.num_cells(1) == 7  # the shared edge appears once

    cxe, te = compile_chain(BoxChain(2, 1, {}))
    assert te.is_zero() and cxe.dims() == ()


def test_compiled_boundary_matches_box_boundary(rng):
    for _ in range(20):
        n = rng.choice([2, 3])
        k = rng.randint(1, n)
        t = random_box_chain(rng, n, k)
        cx, tc = compile_chain(t)
        assert cx.validate().ok
        assert tc.boundary().mass() == t.boundary().mass()
        assert tc.mass() == t.mass()


def test_arrangement_complex_has_fillings(rng):
    t = unit_square().boundary()
    cx, tc = arrangement_complex(t)
    assert cx.num_cells(2) == 1
    assert cx.validate().ok
    with pytest.raises(PreconditionError):
        arrangement_complex(t, subdivide=0)
