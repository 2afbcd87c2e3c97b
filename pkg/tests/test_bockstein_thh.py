"""Tests for the named Bockstein towers of THH of connective K-theory.

Frozen values below were computed with the slot state machine and checked
by hand against the additive presentations; chart coordinates follow the
bidegree table of the module under test.
"""

import math
import random
from collections import defaultdict

import pytest

from thhku.bockstein_thh import (
    INF,
    PAGE_IDS,
    Label,
    bidegree,
    build_e1,
    circ_mark,
    collapse_linter,
    composite_v1,
    default_bound,
    degree_orders,
    differential_graph,
    einfty_levels,
    extended_presentation_l,
    lint_indecomposables,
    presentation_thh_ku,
    presentation_thh_ku_modv1,
    presentation_thh_l,
    run_named,
    scalar_extension_cokernel,
    torsion_block,
    v1_input_from_uT,
    verify_consistency,
)
from thhku.bockstein_thh import _instances  # noqa: F401  (white-box tests)


def final_names(run):
    """{name: (multiplier, order exponent)} for the surviving slots."""
    return {lab.name(): tuple(st) for lab, st in run.final.items()}


def column(run, d):
    """Sorted (name, multiplier, order) triples in one total degree."""
    out = [(lab.name(), st[0], st[1]) for lab, st in run.final.items()
           if run.ss.degree(lab) == d]
    return sorted(out)


# ---------------------------------------------------------------------------
# labels and bidegrees
# ---------------------------------------------------------------------------


def test_label_names():
    assert Label().name() == "1"
    assert Label(mu=9, v0=1).name() == "v0*mu_9"
    assert Label(mu=3, sigma=1, uexp=6).name() == "u^6*su*mu_3"
    assert Label(mu=9, sv1=1, vexp=2).name() == "v1^2*sv1*mu_9"
    assert Label(uexp=1).name() == "u"


def test_bidegree_table():
    # |mu_N| = (2N-1, 0), |su| = (3, 0), |u| = (0, 2) on the u-tower chart
    assert bidegree("u", 3, Label(mu=3)) == (5, 0)
    assert bidegree("u", 3, Label(sigma=1)) == (3, 0)
    assert bidegree("u", 3, Label(uexp=1)) == (0, 2)
    assert bidegree("u", 3, Label(mu=3, sigma=1, uexp=2)) == (8, 4)
    # |sv1| = (0, 2p-1), |v1| = (0, 2(p-1)) on the Adams-summand chart
    assert bidegree("lZ", 3, Label(sv1=1)) == (0, 5)
    assert bidegree("l", 3, Label(mu=9, sv1=1, vexp=2)) == (17, 13)
    # the height-graded charts carry u- and phiu-height in y
    assert bidegree("uZ", 3, Label(mu=3, sigma=1)) == (5, 3)
    assert bidegree("uvZ", 3, Label(gamma=1)) == (0, 6)


def test_total_degree_drops_by_one():
    # every genuine rule instance moves (x, y) by (-r-1, +r); the k = 0
    # conventions (coefficient p^inf, target written on the unit column)
    # are exempt
    for pid in ("lZ", "l", "uT", "u", "uTB", "v1"):
        ss = build_e1(pid, 3, 40)
        for inst in _instances(ss):
            if inst.coeff == INF:
                continue
            sx, sy = ss.xy(inst.source)
            tx, ty = ss.xy(inst.target)
            assert (sx + sy) - (tx + ty) == 1
            # the gathered families also cross the sv1 line (+2p-1 in y)
            extra = 2 * 3 - 1 if pid == "l" else 0
            assert ty - sy == inst.stage + extra


# ---------------------------------------------------------------------------
# E^1 pages
# ---------------------------------------------------------------------------


def test_build_e1_small_windows():
    page = build_e1("lZ", 3, 5)
    assert sorted((lab.name(), page.xy(lab)) for lab in page.cells) == [
        ("1", (0, 0)), ("mu_3", (5, 0)), ("sv1", (0, 5))]
    u6 = build_e1("u", 3, 6)
    deg5 = {(lab.name(), e) for lab, e in u6.cells.items()
            if u6.degree(lab) == 5}
    assert deg5 == {("u*su", INF), ("mu_3", 1)}


def test_build_e1_truncated_heights():
    # u^{p-1} = 0 with mod-p coefficients: chart heights 0 and 2 only at p=3
    ut = build_e1("uT", 3, 12)
    assert sorted({ut.xy(lab)[1] for lab in ut.cells}) == [0, 2]
    ut5 = build_e1("uT", 5, 14)
    assert sorted({ut5.xy(lab)[1] for lab in ut5.cells}) == [0, 2, 4, 6]


def test_build_e1_orders():
    # mu_{kp} carries Z/p^{nu(k)+1}; mu_n vanishes for p not dividing n
    page = build_e1("u", 3, 60)
    assert page.cells[Label(mu=3)] == 1
    assert page.cells[Label(mu=9)] == 2
    assert page.cells[Label(mu=27)] == 3
    assert page.cells[Label(mu=12)] == 1
    assert Label(mu=4) not in page.cells
    assert page.cells[Label(uexp=5)] == INF


def test_build_e1_errors():
    with pytest.raises(ValueError):
        build_e1("nosuchpage", 3, 10)
    with pytest.raises(ValueError):
        build_e1("u", 2, 10)
    with pytest.raises(ValueError):
        build_e1("u", 6, 10)


# ---------------------------------------------------------------------------
# rule instances
# ---------------------------------------------------------------------------


def test_instance_u_page():
    ss = build_e1("u", 3, 20)
    got = {(i.source.name(), i.target.name(), i.coeff, i.prefix, i.steps)
           for i in _instances(ss)}
    # d(mu_6) = u su mu_3 with unit coefficient, one tower step
    assert ("mu_6", "u*su*mu_3", 0, 0, 1) in got
    # the k = 0 instance is recorded with a formally infinite coefficient
    assert ("mu_9", "u^7*su", INF, 1, 7) in got


def test_instance_lZ_page():
    ss = build_e1("lZ", 3, 20)
    got = {(i.source.name(), i.target.name(), i.coeff) for i in _instances(ss)}
    assert ("mu_6", "sv1*mu_3", 0) in got
    assert ("mu_9", "sv1*mu_6", 0) in got
    assert ("mu_3", "sv1", INF) in got


def test_k0_instances_are_skipped_not_applied():
    run = run_named("u", 3, 20)
    skipped = {(i.source.name(), i.target.name(), i.prefix)
               for st in run.stages for i in st.skipped if i.coeff == INF}
    assert ("mu_9", "u^7*su", 1) in skipped
    # mu_9 survives with multiplier 1 (prefix p * mu_9 after the n=0 stage)
    assert final_names(run)["mu_9"] == (1, 1)


# ---------------------------------------------------------------------------
# frozen runs
# ---------------------------------------------------------------------------


def test_run_lZ_p3_frozen():
    run = run_named("lZ", 3, 30)
    assert final_names(run) == {
        "1": (0, INF),
        "sv1": (0, INF),
        "mu_3": (0, 1),
        "mu_9": (1, 1),
        "sv1*mu_9": (0, 1),
    }
    assert str(run.einfty[(17, 0)]) == "Z/p"
    assert str(run.einfty[(0, 5)]) == "Z"


def test_run_u_p3_columns():
    run = run_named("u", 3, 54)
    assert column(run, 8) == [("su*mu_3", 0, 1), ("u^4", 0, INF)]
    assert column(run, 17) == [
        ("mu_9", 1, 1), ("u^6*mu_3", 0, 1), ("u^7*su", 0, INF)]
    assert column(run, 53) == [
        ("mu_27", 2, 1), ("u^18*mu_9", 1, 1),
        ("u^24*mu_3", 0, 1), ("u^25*su", 0, INF)]


def test_run_l_tower_ladder():
    # sv1 mu_54 at p=3: order p^2 for v1-powers 0..2, p for 3..11, then zero
    run = run_named("l", 3, 164)
    tower = {lab.vexp: tuple(st) for lab, st in run.final.items()
             if lab.mu == 54 and lab.sv1 == 1
             and run.ss.degree(lab) < 164}
    assert tower == {t: (0, 2) for t in range(3)} | {
        t: (0, 1) for t in range(3, 12)}
    chain = final_names(run)
    assert chain["v0*mu_81"] == (2, 1)


def test_edge_degrees_and_monotone_pages():
    run = run_named("u", 3, 40)
    assert run.edge_degrees == {40}
    # passing to a later page only shrinks each degree (free rank and length)
    def per_degree(state):
        t = defaultdict(lambda: [0, 0])
        for lab, (a, e) in state.items():
            d = run.ss.degree(lab)
            if e == INF:
                t[d][0] += 1
            else:
                t[d][1] += e
        return t
    tables = [per_degree(pg) for pg in run.pages]
    for before, after in zip(tables, tables[1:]):
        for d in set(before) | set(after):
            f0, l0 = before.get(d, (0, 0))
            f1, l1 = after.get(d, (0, 0))
            assert f1 <= f0 and f1 + l1 <= f0 + l0


def test_run_rules_rejects_bad_input():
    with pytest.raises(ValueError):
        run_named("u", 2, 10)
    with pytest.raises(ValueError):
        run_named("zZ", 3, 10)


# ---------------------------------------------------------------------------
# gathered tower
# ---------------------------------------------------------------------------


def test_composite_matches_u_tower():
    p, D = 3, 40
    left = degree_orders(composite_v1(p, D))
    right = degree_orders(run_named("u", p, D))
    for d in range(D):
        assert left.get(d, (0, 0)) == right.get(d, (0, 0)), d


def test_v1_input_requires_truncated_run():
    with pytest.raises(ValueError):
        v1_input_from_uT(run_named("u", 3, 10))
    fed = v1_input_from_uT(run_named("uT", 3, 20))
    assert fed.id == "v1"
    # the fed page carries mu_p as a fresh torsion slot of order p
    assert fed.cells[Label(mu=3)] == 1


def test_v1_e1_slice_matches_modv1_groups():
    p, D = 3, 40
    mv = presentation_thh_ku_modv1(p, D)
    ss = build_e1("v1", p, D)
    per = defaultdict(list)
    for lab, e in ss.cells.items():
        if lab.vexp == 0:
            per[ss.degree(lab)].append(e)
    for d in range(D):
        free, exps = mv.group_in_degree(d).as_pair()
        want = sorted([INF] * free + list(exps), key=str)
        assert sorted(per.get(d, []), key=str) == want, d


def test_v1_einfty_matches_banded_filtration():
    p, D = 3, 40
    run = run_named("v1", p, D)
    levels = einfty_levels(run, level=lambda lab: lab.vexp)
    gr = presentation_thh_ku(p, D).gr_filtration(D - 1, band=p - 1)
    for key in {k for k in set(levels) | set(gr) if k[0] < D}:
        assert levels.get(key) == gr.get(key), key


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------


def test_presentation_l_relations():
    pres = presentation_thh_l(3, 60)
    eqs = {r.equation("v1") for r in pres.relations}
    assert "3*mu_3 = sv1" in eqs
    assert "3*v0*mu_9 = v1^3*mu_3" in eqs
    assert "v1^3*sv1*mu_9 = 0" in eqs
    assert "3*sv1*mu_27 = v0*sv1*mu_27" in eqs
    assert "v1^12*sv1*mu_27 = 0" in eqs


def test_presentation_ku_relations():
    pres = presentation_thh_ku(3, 40)
    eqs = {r.equation("u") for r in pres.relations}
    assert "3*mu_3 = u*su" in eqs
    assert "3*v0*mu_9 = u^6*mu_3" in eqs
    assert "u*su*mu_3 = 0" in eqs
    assert "3*su*mu_3 = 0" in eqs
    assert "3*su*mu_15 = u^6*su*mu_9" in eqs
    assert "u^7*su*mu_9 = 0" in eqs
    assert "3*su*mu_9 = v0*su*mu_9" in eqs


def test_presentation_modv1_relations():
    pres = presentation_thh_ku_modv1(3, 16)
    assert [g.name for g in pres.generators[:3]] == ["1", "su", "mu_3"]
    eqs = {r.equation("u") for r in pres.relations}
    assert "u*su = 3*mu_3" in eqs
    assert "u*v0*mu_6 = 3*u*mu_6" in eqs
    assert "3*u*mu_6 = 0" in eqs
    assert "v0*mu_6 = 0" in eqs


def test_group_in_degree_examples():
    ku = presentation_thh_ku(3, 60)
    mv = presentation_thh_ku_modv1(3, 60)
    assert ku.group_in_degree(5).as_pair() == (1, ())
    assert mv.group_in_degree(5).as_pair() == (1, ())
    assert ku.group_in_degree(8).as_pair() == (1, (1,))
    assert ku.group_in_degree(53).as_pair() == (1, ())
    assert ku.group_in_degree(0).as_pair() == (1, ())
    # degrees 0..3: Z, 0, Z, Z
    assert [ku.group_in_degree(d).as_pair() for d in range(4)] == [
        (1, ()), (0, ()), (1, ()), (1, ())]


def test_rationalized_ranks():
    # one polynomial generator in degree 2 and one exterior in degree 3
    ku = presentation_thh_ku(3, 60)
    for d in range(61):
        want = 1 if (d % 2 == 0 or d >= 3) else 0
        assert ku.group_in_degree(d).free_rank == want, d


def test_extension_glues_torsion_under_free():
    # on the truncated page, 3 mu_3 = u su survives as a filtration jump:
    # E^infinity in degree 5 is Z/3 + Z while the abutment group is Z
    run = run_named("uT", 3, 20)
    assert column(run, 5) == [("mu_3", 0, 1), ("u*su", 0, INF)]
    mv = presentation_thh_ku_modv1(3, 20)
    assert mv.group_in_degree(5).as_pair() == (1, ())
    # in even degrees the names carry no u-power and levels match exactly
    levels = einfty_levels(run)
    gr = mv.gr_filtration(19, band=1)
    for key in {k for k in set(levels) | set(gr) if k[0] < 20 and k[0] % 2 == 0}:
        assert levels.get(key) == gr.get(key), key


def test_gr_filtration_matches_l_tower():
    p, D = 3, 60
    run = run_named("l", p, D)
    levels = einfty_levels(run, level=lambda lab: lab.vexp)
    gr = presentation_thh_l(p, D).gr_filtration(D - 1, band=1)
    for key in {k for k in set(levels) | set(gr) if k[0] < D}:
        assert levels.get(key) == gr.get(key), key


def test_module_agrees_with_group_in_degree():
    pres = presentation_thh_ku(3, 40)
    for d in range(40):
        basis, lattice = pres.module(d)
        assert str(lattice.invariants()) == str(pres.group_in_degree(d)), d


def test_free_sector_u_injective():
    pres = presentation_thh_ku(3, 60)
    assert all(pres.free_u_injective(d) for d in range(60))


def test_pure_u_power_kills_torsion_generators():
    # every torsion generator dies under a pure u-power (no p mixed in)
    pres = presentation_thh_ku(3, 60)
    for gen in pres.generators:
        if gen.sector != "torsion":
            continue
        pure = [r for r in pres.relations
                if len(r.terms) == 1 and r.terms[0][0] == 1
                and r.terms[0][2] == gen.name]
        assert pure, gen.name


# ---------------------------------------------------------------------------
# consistency checks
# ---------------------------------------------------------------------------


def test_verify_consistency_p3():
    report = verify_consistency(3, 40)
    assert report.passed
    assert len(report.checks) == 4
    text = str(report)
    assert "[ok  ]" in text and "[FAIL]" not in text


def test_torsion_coincidence_spot():
    # degree 8: the u-power torsion class su*mu_3 has order exactly p
    pres = presentation_thh_ku(3, 40)
    basis, lattice = pres.module(8, "torsion")
    assert str(lattice.invariants()) == "Z/p"


# ---------------------------------------------------------------------------
# scalar extension
# ---------------------------------------------------------------------------


def test_scalar_extension_embeds():
    injective, first, coker = scalar_extension_cokernel(3, 40)
    assert injective and first is None
    assert str(coker[3]) == "Z"
    assert str(coker[8]) == "Z/p"
    assert str(coker[14]) == "Z/p"
    assert str(coker[20]) == "Z/p^2"
    assert 5 not in coker  # p = 3 truncates the u-translates away


def test_scalar_extension_p5_cokernel():
    injective, _first, coker = scalar_extension_cokernel(5, 60)
    assert injective
    assert [d for d in sorted(coker) if d <= 16] == [3, 5, 7, 12, 14, 16]
    assert str(coker[7]) == "Z"
    assert str(coker[12]) == "Z/p"


def test_extended_presentation_degrees():
    ext = extended_presentation_l(3, 40)
    assert ext.step == 2
    base = presentation_thh_l(3, 40)
    assert [g.name for g in ext.generators] == [g.name for g in base.generators]
    # relation degrees rescale by p - 1 in the u-grading
    eqs = {r.equation("u") for r in ext.relations}
    assert "3*v0*mu_9 = u^6*mu_3" in eqs


# ---------------------------------------------------------------------------
# the differential graph
# ---------------------------------------------------------------------------


def test_differential_graph_p3():
    rep = differential_graph(3, 729)
    assert (rep.vertices, rep.edges) == (488, 364)
    assert rep.bipartite and rep.acyclic and rep.valuation_unique
    assert rep.offenders == ()
    assert sorted(rep.excluded) == ["1", "su", "su*mu_729"]
    assert len(rep.components) == rep.vertices - rep.edges


def test_differential_graph_components():
    rep = differential_graph(3, 81)
    comps = dict(rep.components)
    # su roots its tree (infinite valuation) and collects mu_9 via P = 9
    assert comps["su"] >= 5
    assert sum(size for _root, size in rep.components) == rep.vertices
    assert sorted(rep.excluded) == ["1", "su", "su*mu_81"]


def test_differential_graph_window_error():
    with pytest.raises(ValueError):
        differential_graph(3, 8)


# ---------------------------------------------------------------------------
# torsion blocks
# ---------------------------------------------------------------------------


def test_torsion_block_counts():
    for (p, n), (nodes, edges) in {
        (3, 1): (1, 0),
        (3, 2): (10, 8),
        (3, 3): (55, 61),
        (5, 1): (3, 2),
        (5, 2): (38, 38),
    }.items():
        rep = torsion_block(p, n)
        assert (len(rep.block.nodes), len(rep.block.edges)) == (nodes, edges)
        assert rep.periodic, (p, n)


def test_torsion_block_t2_edges():
    rep = torsion_block(3, 2)
    by_source = {(e.kind, e.source): e.targets for e in rep.block.edges}
    assert by_source[("p", "su*mu_9")] == ("v0*su*mu_9",)
    assert by_source[("p", "su*mu_15")] == ("u^6*su*mu_9",)
    assert by_source[("u", "u^5*su*mu_9")] == ("u^6*su*mu_9",)
    assert ("u", "u^6*su*mu_9") not in by_source


def test_torsion_block_t3_sum_edge():
    rep = torsion_block(3, 3)
    multi = [e for e in rep.block.edges if len(e.targets) > 1]
    assert [(e.source, e.targets) for e in multi] == [
        ("su*mu_45", ("v0*su*mu_45", "u^18*su*mu_27"))]
    # drawn as two lines from one node in chart form
    assert sum(len(e.targets) for e in rep.block.edges) == 62


def test_torsion_block_window_and_errors():
    rep = torsion_block(3, 2)
    assert rep.block.window == (20, 37)
    assert len(rep.copies) == 2
    with pytest.raises(ValueError):
        torsion_block(3, 0)
    with pytest.raises(ValueError):
        torsion_block(2, 1)


def test_circ_marks_match_inclusion_image():
    rep = torsion_block(3, 2)
    marks = {n.name: circ_mark(3, n) for n in rep.block.nodes if n.mu == 9}
    assert marks == {
        "su*mu_9": False, "u*su*mu_9": True, "u^2*su*mu_9": False,
        "u^3*su*mu_9": True, "u^4*su*mu_9": False, "u^5*su*mu_9": True,
        "u^6*su*mu_9": False, "v0*su*mu_9": False}
    rep3 = torsion_block(3, 3)
    h0 = {n.j: circ_mark(3, n) for n in rep3.block.nodes
          if n.mu == 27 and n.h == 0}
    assert {j for j, m in h0.items() if m} == set(range(1, 24, 2))
    h2 = [circ_mark(3, n) for n in rep3.block.nodes if n.mu == 27 and n.h == 2]
    assert h2 == [False]
    rep5 = torsion_block(5, 1)
    assert not any(circ_mark(5, n) for n in rep5.block.nodes)


# ---------------------------------------------------------------------------
# collapse linting
# ---------------------------------------------------------------------------


def test_collapse_linter_height_graded():
    cands = collapse_linter(build_e1("uZ", 3, 30))
    assert cands
    assert {(c.source.mu - c.target.mu, c.jump) for c in cands} == {(2, 3)}
    assert all(c.verdict != "viable" for c in cands)


def test_collapse_linter_lZ():
    assert collapse_linter(build_e1("lZ", 3, 5)) == []
    cands = collapse_linter(build_e1("lZ", 3, 30))
    assert {c.jump for c in cands} == {5}
    assert {c.source.mu - c.target.mu for c in cands} == {3}


def test_lint_indecomposables_uvZ():
    cands = lint_indecomposables(build_e1("uvZ", 3, 40))
    assert all(c.verdict != "viable" for c in cands)


# ---------------------------------------------------------------------------
# a seeded sweep across all pages
# ---------------------------------------------------------------------------


def test_random_windows_run_clean():
    rng = random.Random(20260819)
    for _ in range(24):
        pid = rng.choice(PAGE_IDS)
        p = rng.choice((3, 5))
        D = rng.randrange(4, 36)
        run = run_named(pid, p, D)
        assert run.edge_degrees <= {D}
        for lab, (a, e) in run.final.items():
            assert run.ss.degree(lab) <= D
            assert e == INF or e >= 1
            assert a >= 0
        # every page id draws its default bound from the same rule
        assert default_bound(p) == 2 * p**3 + 4 * p
