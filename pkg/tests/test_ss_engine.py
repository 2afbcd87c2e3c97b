"""Tests for the filtered-complex spectral sequence engine."""

import random
from collections import Counter

import pytest

from thhku._lattice import GroupInvariants
from thhku.ss_engine import (
    THEOREMS,
    FilteredComplex,
    GatherMap,
    counterexample_fixture,
    diff_relation,
    einfty_oracle,
    gather,
    random_filtered_complex,
    random_gather_map,
    ss_pages,
    transfer_check,
    truncate,
)


def two_term(ring="Zp"):
    """d(a) = 9 b with b two levels deeper, over Z_(3) or F_3."""
    return FilteredComplex(
        3, {0: ["b"], 1: ["a"]}, {0: [2], 1: [0]}, {1: [[9]]}, (0, 3), ring=ring
    )


def grid_fixture():
    """A 12 x 7 staircase chart over F_3: one generator per chart spot (x, y),
    x = 0..11, y = 0..6, in degree x + y at level y, with three boundary
    arrows (4,1)->(2,2), (10,3)->(7,5) and (8,0)->(3,4) in chart coordinates,
    giving differentials of length 1, 2 and 4."""
    names, levels, pos = {}, {}, {}
    for d in range(18):
        names[d], levels[d] = [], []
    for x in range(12):
        for y in range(7):
            d = x + y
            pos[(x, y)] = (d, len(names[d]))
            names[d].append(f"g{x}.{y}")
            levels[d].append(y)
    bnds = {d: [[0] * len(names[d]) for _ in names.get(d - 1, [])] for d in names}
    for (sx, sy), (tx, ty) in [((4, 1), (2, 2)), ((10, 3), (7, 5)), ((8, 0), (3, 4))]:
        sd, sj = pos[(sx, sy)]
        td, ti = pos[(tx, ty)]
        bnds[sd][ti][sj] = 1
    return FilteredComplex(3, names, levels, bnds, (0, 7), ring="Fp")


def chart_columns(spots):
    """Total number of E-infinity summands per chart column x = degree - level."""
    cols = Counter()
    for (y, d), inv in spots.items():
        cols[d - y] += inv.free_rank + len(inv.exponents)
    return dict(cols)


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------


def test_validation_rejects_level_drop():
    with pytest.raises(ValueError, match="lowers filtration"):
        FilteredComplex(3, {0: ["b"], 1: ["a"]}, {0: [0], 1: [2]}, {1: [[1]]}, (0, 3))


def test_validation_rejects_nonzero_boundary_squared():
    names = {0: ["c"], 1: ["b"], 2: ["a"]}
    levels = {0: [0], 1: [0], 2: [0]}
    with pytest.raises(ValueError, match="squared"):
        FilteredComplex(3, names, levels, {1: [[1]], 2: [[1]]}, (0, 1))
    # ...but a composite that only vanishes mod p is fine over Fp
    FilteredComplex(3, names, levels, {1: [[1]], 2: [[3]]}, (0, 1), ring="Fp")


def test_validation_rejects_bad_window_and_shape():
    with pytest.raises(ValueError, match="window"):
        FilteredComplex(3, {0: ["a"]}, {0: [0]}, {}, (1, 1))
    with pytest.raises(ValueError, match="shape"):
        FilteredComplex(3, {0: ["b"], 1: ["a"]}, {0: [0], 1: [0]}, {1: [[1, 2]]}, (0, 1))


# ---------------------------------------------------------------------------
# pages on the two-term complex, frozen by hand
# ---------------------------------------------------------------------------


def test_two_term_pages_plocal():
    pages = ss_pages(two_term())
    assert len(pages) == 4
    assert sorted(pages[0].cells) == [(0, 1), (2, 0)]
    assert pages[0].group(0, 1) == GroupInvariants(1, ())
    assert pages[0].differentials == []
    # d^2(a) = 9 b
    (d2,) = pages[1].differentials
    assert (d2.source, d2.target, d2.matrix) == ((0, 1), (2, 0), [[9]])
    # afterwards only Z/9 in degree 0 survives
    assert sorted(pages[2].cells) == [(2, 0)]
    assert pages[2].group(2, 0) == GroupInvariants(0, (2,))
    assert {k: c.invariants for k, c in pages[-1].cells.items()} == einfty_oracle(
        two_term()
    )


def test_two_term_pages_mod_p():
    """Mod 3 the coefficient 9 vanishes, so nothing ever cancels."""
    fc = two_term("Fp")
    pages = ss_pages(fc)
    assert all(not p.differentials for p in pages)
    assert {k: str(c.invariants) for k, c in pages[-1].cells.items()} == {
        (0, 1): "Z/p",
        (2, 0): "Z/p",
    }
    assert {k: c.invariants for k, c in pages[-1].cells.items()} == einfty_oracle(fc)


def test_two_term_diff_relation():
    fc = two_term()
    assert diff_relation(fc, 1, 0, 2, [1], [9])
    # the page-2 target has trivial denominator, so 18 b is a different class
    assert not diff_relation(fc, 1, 0, 2, [1], [18])
    assert not diff_relation(fc, 1, 0, 2, [1])
    assert diff_relation(fc, 1, 0, 1, [1])  # survives page 1: d(a) two levels deep
    with pytest.raises(ValueError, match="supported"):
        diff_relation(fc, 1, 1, 1, [1])  # a sits at level 0, not in F_1
    with pytest.raises(ValueError, match="r must be"):
        diff_relation(fc, 1, 0, 0, [1])


# ---------------------------------------------------------------------------
# grid fixture: pages, truncations, gathering, transfer -- frozen values
# ---------------------------------------------------------------------------


def test_grid_differentials():
    pages = ss_pages(grid_fixture())
    hits = {
        p.r: [(d.source, d.target) for d in p.differentials]
        for p in pages
        if p.differentials
    }
    assert hits == {
        1: [((1, 5), (2, 4))],
        2: [((3, 13), (5, 12))],
        4: [((0, 8), (4, 7))],
    }


def test_grid_einfty_columns():
    fc = grid_fixture()
    pages = ss_pages(fc)
    spots = {k: c.invariants for k, c in pages[-1].cells.items()}
    assert spots == einfty_oracle(fc)
    cols = chart_columns(spots)
    # each of the six chart spots in a cancelled pair costs its column one class
    assert cols == {x: 6 if x in (2, 3, 4, 7, 8, 10) else 7 for x in range(12)}


def test_grid_truncations():
    fc = grid_fixture()
    low = chart_columns(einfty_oracle(truncate(fc, 0, 3)))
    assert low == {x: 2 if x in (2, 4) else 3 for x in range(12)}
    high = chart_columns(einfty_oracle(truncate(fc, 3, 7)))
    assert high == {x: 3 if x in (7, 10) else 4 for x in range(12)}


def test_grid_gathered():
    fc = grid_fixture()
    phi = GatherMap({0: 0, 1: 3, 2: 7})
    gfc = gather(fc, phi)
    assert (gfc.n_min, gfc.n_max) == (0, 2)
    pages = ss_pages(gfc)
    # the long differential becomes a gathered d^1 between the blocks
    (d1,) = pages[0].differentials
    assert (d1.source, d1.target) == ((0, 8), (1, 7))
    assert any(any(row) for row in d1.matrix)
    assert {k: c.invariants for k, c in pages[-1].cells.items()} == einfty_oracle(gfc)


def test_grid_transfer_checks():
    fc = grid_fixture()
    phi = GatherMap({0: 0, 1: 3, 2: 7})
    for theorem in THEOREMS:
        report = transfer_check(fc, phi, theorem, max_instances=200)
        assert report.passed, report.failures
        assert report.checks > 0
    # the long differential is seen by the cross-block checkers
    assert transfer_check(fc, phi, "long", max_instances=200).instances == 1
    assert transfer_check(fc, phi, "back", max_instances=200).instances == 1


# ---------------------------------------------------------------------------
# gather maps
# ---------------------------------------------------------------------------


def test_gather_map_basics():
    phi = GatherMap({0: 0, 1: 3, 2: 7})
    assert [phi(n) for n in (-2, -1, 0, 1, 2, 3, 4)] == [-2, -1, 0, 3, 7, 8, 9]
    for n in range(-3, 6):
        assert phi.inverse_level(phi(n)) == n
        assert phi.inverse_level(phi(n + 1) - 1) == n
    assert GatherMap.identity()(17) == 17
    assert GatherMap.linear(2, offset=1)(3) == 7
    assert GatherMap.linear(2).inverse_level(5) == 2


def test_gather_map_validation():
    with pytest.raises(ValueError, match="contiguous"):
        GatherMap({0: 0, 2: 4})
    with pytest.raises(ValueError, match="increasing"):
        GatherMap({0: 0, 1: 0})
    with pytest.raises(ValueError, match="slope"):
        GatherMap({0: 0}, left_slope=0)


def test_gather_identity_keeps_pages():
    fc = random_filtered_complex(7)
    gfc = gather(fc, GatherMap.identity())
    assert einfty_oracle(gfc) == einfty_oracle(fc)
    assert gfc.basis_levels(1) == fc.basis_levels(1)


def test_truncate_full_window_is_identity():
    fc = random_filtered_complex(11)
    tfc = truncate(fc, fc.n_min, fc.n_max)
    assert einfty_oracle(tfc) == einfty_oracle(fc)
    assert tfc.basis_names(0) == fc.basis_names(0)


# ---------------------------------------------------------------------------
# the counterexample fixture: a gathered differential invisible from the
# deepest representative of its source
# ---------------------------------------------------------------------------


def test_counterexample_pages():
    fc, phi = counterexample_fixture()
    pages = ss_pages(fc)
    assert {k: str(c.invariants) for k, c in pages[0].cells.items()} == {
        (0, 1): "Z",
        (1, 1): "Z",
        (2, 0): "Z",
    }
    (d1,) = pages[0].differentials
    assert (d1.source, d1.target, d1.matrix) == ((1, 1), (2, 0), [[1]])
    assert {k: str(c.invariants) for k, c in pages[-1].cells.items()} == {(0, 1): "Z"}

    gfc = gather(fc, phi)
    gpages = ss_pages(gfc)
    assert gpages[0].group(0, 1) == GroupInvariants(2, ())
    assert len(gpages[0].differentials) == 1


def test_counterexample_relations():
    fc, phi = counterexample_fixture()
    gfc = gather(fc, phi)
    x_full = [1, 1]  # x = x' + (x - x')
    x_deep = [0, 1]  # its deepest (level-0) representative x - x'
    # the gathered class of x supports d^1(x) = y ...
    assert diff_relation(gfc, 1, 0, 1, x_full, [1])
    assert not diff_relation(gfc, 1, 0, 1, x_full)
    # ... while every differential on the deepest representative vanishes
    for r in (1, 2, 3):
        assert diff_relation(fc, 1, 0, r, x_deep)
    # the gathered differential is witnessed by the level-1 lift x'
    assert diff_relation(fc, 1, 1, 1, [1, 0], [1])
    assert not diff_relation(fc, 1, 1, 1, [1, 0])


def test_counterexample_transfer():
    fc, phi = counterexample_fixture()
    for theorem in THEOREMS:
        report = transfer_check(fc, phi, theorem)
        assert report.passed, report.failures


# ---------------------------------------------------------------------------
# strictness of the null_a range
# ---------------------------------------------------------------------------


def endpoint_complex():
    """d(x) = z with z four levels deeper; grouping levels as {0,1,2}, {3},
    {4} makes x a gathered 1-cycle whose vanishing conclusions stop just
    short of level phi(M+1) = 4."""
    fc = FilteredComplex(3, {0: ["z"], 1: ["x"]}, {0: [4], 1: [0]}, {1: [[1]]}, (0, 5))
    return fc, GatherMap({0: 0, 1: 3, 2: 4})


def test_null_a_interior_holds_endpoint_fails():
    fc, phi = endpoint_complex()
    gfc = gather(fc, phi)
    assert diff_relation(gfc, 1, 0, 1, [1])  # gathered 1-cycle
    assert not diff_relation(gfc, 1, 0, 2, [1])
    # vanishing holds strictly inside the claimed range ...
    for m in (1, 2, 3):
        assert diff_relation(fc, 1, 0, m, [1])
    # ... and genuinely fails at the endpoint m = phi(M+1): the hypothesis
    # cannot see where inside the next block the boundary lands
    assert not diff_relation(fc, 1, 0, 4, [1])
    report = transfer_check(fc, phi, "null_a")
    assert report.passed, report.failures


# ---------------------------------------------------------------------------
# randomized cross-validation
# ---------------------------------------------------------------------------


def test_einfty_matches_oracle_sweep():
    for seed in range(40):
        fc = random_filtered_complex(seed)
        pages = ss_pages(fc)
        got = {k: c.invariants for k, c in pages[-1].cells.items()}
        assert got == einfty_oracle(fc), f"seed {seed}"


def test_page_differentials_respect_relation_sweep():
    """Every matrix entry produced by ss_pages is certified by diff_relation."""
    for seed in range(12):
        fc = random_filtered_complex(seed)
        for page in ss_pages(fc):
            for diff in page.differentials:
                y, d = diff.source
                tgt = page.cells[diff.target]
                for g, _ in page.cells[diff.source].gens:
                    image = tgt.quot.reduce(fc.reduce_chain(fc.boundary_map(d, g)))
                    assert diff_relation(fc, d, y, page.r, g, image), f"seed {seed}"


def test_transfer_sweep():
    for seed in range(25):
        fc = random_filtered_complex(seed)
        phi = random_gather_map(random.Random(10_000 + seed), fc.n_min, fc.n_max)
        for theorem in THEOREMS:
            report = transfer_check(fc, phi, theorem)
            assert report.passed, (seed, theorem, report.failures)


def test_random_complex_is_reproducible():
    a, b = random_filtered_complex(5), random_filtered_complex(5)
    assert a.degrees() == b.degrees()
    assert all(a.boundary(d) == b.boundary(d) for d in a.degrees())
    assert all(a.basis_levels(d) == b.basis_levels(d) for d in a.degrees())
