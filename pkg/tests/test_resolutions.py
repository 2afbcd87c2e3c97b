"""Tests for the periodic-resolution Tor oracles."""

import pytest

from thhku.graded_core import GroupInvariants, make_algebra
from thhku.resolutions import (
    CASES,
    ResolutionSpec,
    periodic_resolution_homology,
    resolution_spec,
    tor_closed_form,
)


def total_ranks(group, top):
    """Free rank per total degree 0..top (torsion contributes nothing)."""
    out = [0] * (top + 1)
    for (s, t), inv in group.items():
        if s + t <= top:
            out[s + t] += inv.free_rank
    return out


# ---------------------------------------------------------------------------
# frozen closed-form values
# ---------------------------------------------------------------------------


def test_divided_power_low_degrees():
    # E(su) (x) Gamma(phiu) at p=3: classes 1, su, gamma_1(phiu) below 7
    assert total_ranks(tor_closed_form("divided_power", 3, 6), 6) == [1, 0, 0, 1, 0, 0, 1]


def test_ku_res_is_exterior_on_degree_three_class():
    g = tor_closed_form("ku_res", 3, 8)
    assert g[(1, 2)].as_pair() == (1, ())
    assert total_ranks(g, 3) == [1, 0, 0, 1]
    assert g.degrees() == [(0, 0), (1, 2)]


def test_trunc_tensor_closed_form():
    for p in (3, 5):
        g = tor_closed_form("trunc_tensor", p, 6 * p)
        assert g[(1, 2 * p - 2)].as_pair() == (1, ())
        expected = [(0, 2 * i) for i in range(p - 1)]
        expected += [(1, 2 * (p - 1) + 2 * i) for i in range(p - 1)]
        assert g.degrees() == sorted(expected)


def test_rational_closed_form_is_free_of_rank_one_per_spot():
    g = tor_closed_form("rational", 5, 20)
    ranks = total_ranks(g, 6)
    assert ranks[0] == 1 and ranks[3] == 1 and ranks[1] == 0
    assert all(inv.exponents == () for _, inv in g.items())


# ---------------------------------------------------------------------------
# resolution homology against the closed forms
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("p", [3, 5])
def test_periodic_resolution_matches_closed_form(case, p):
    spec = resolution_spec(case, p)
    D = 6 * p
    assert periodic_resolution_homology(spec, D) == tor_closed_form(case, p, D)


@pytest.mark.parametrize("case", CASES)
def test_stage_count_stability(case):
    # unrolling extra periods must not change anything below the bound
    spec = resolution_spec(case, 3)
    D = 18
    base = periodic_resolution_homology(spec, D)
    length = len(spec.multipliers)
    for extra in (length, 2 * length, D):
        assert periodic_resolution_homology(spec, D, stages=D + extra) == base


def test_ku_res_homology_exact():
    spec = resolution_spec("ku_res", 3)
    g = periodic_resolution_homology(spec, 10)
    assert g.items() == [
        ((0, 0), GroupInvariants(1, ())),
        ((1, 2), GroupInvariants(1, ())),
    ]


def test_divided_power_stage_shifts():
    spec = resolution_spec("divided_power", 5)
    assert [spec.stage_shift(s) for s in range(5)] == [0, 2, 8, 10, 16]
    assert spec.last_stage() is None
    assert resolution_spec("ku_res", 5).last_stage() == 1


# ---------------------------------------------------------------------------
# a pattern whose tensored boundary is nonzero
# ---------------------------------------------------------------------------


def test_custom_pattern_with_torsion():
    # resolve along multiplication by p itself: homology is Z/p in one spot
    base = make_algebra([("u", 2, "P")])
    integers = make_algebra([])
    spec = ResolutionSpec(
        "times_p",
        3,
        base,
        [base.element({(0,): 3})],
        (0, 0),
        integers,
        {"u": integers.element()},
        module="Z/p",
    )
    g = periodic_resolution_homology(spec, 4)
    assert g.items() == [((0, 0), GroupInvariants(0, (1,)))]


def test_cokernel_of_u_with_polynomial_coefficients():
    # tensoring the .u resolution with P(u) itself leaves only P(u)/u = Z
    base = make_algebra([("u", 2, "P")])
    poly = make_algebra([("u", 2, "P")])
    spec = ResolutionSpec(
        "self_tensor",
        3,
        base,
        [base.gen_element("u")],
        (0, 2),
        poly,
        {"u": poly.gen_element("u")},
        module="Z_(p)",
    )
    g = periodic_resolution_homology(spec, 12)
    assert g.items() == [((0, 0), GroupInvariants(1, ()))]


# ---------------------------------------------------------------------------
# validation errors
# ---------------------------------------------------------------------------


def test_nonzero_composition_rejected():
    base = make_algebra([("u", 2, "P")])
    integers = make_algebra([])
    with pytest.raises(ValueError, match="compose to zero"):
        ResolutionSpec(
            "bad",
            3,
            base,
            [base.gen_element("u")] * 2,
            (0, 2, 4),
            integers,
            {"u": integers.element()},
            periodic=True,
        )


def test_shift_mismatch_rejected():
    base = make_algebra([("u", 2, "P")])
    integers = make_algebra([])
    with pytest.raises(ValueError, match="stage shift"):
        ResolutionSpec(
            "bad",
            3,
            base,
            [base.gen_element("u")],
            (0, 4),
            integers,
            {"u": integers.element()},
        )


def test_unsupported_case_and_prime_rejected():
    with pytest.raises(ValueError, match="unsupported case"):
        resolution_spec("nope", 3)
    with pytest.raises(ValueError, match="unsupported case"):
        tor_closed_form("nope", 3, 10)
    with pytest.raises(ValueError, match="odd prime"):
        resolution_spec("ku_res", 2)


def test_finite_pattern_stage_bounds():
    spec = resolution_spec("ku_res", 3)
    with pytest.raises(ValueError, match="outside"):
        spec.stage_shift(2)
