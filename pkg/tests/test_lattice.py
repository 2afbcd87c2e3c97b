"""Tests for the integer-lattice toolkit.

Smith normal forms are cross-checked against sympy's implementation
(independent oracle) on seeded random matrices, plus frozen hand-computed
examples and structural property sweeps.
"""

import random
from fractions import Fraction
from math import inf

import pytest

from thhku._lattice import (
    GroupInvariants,
    Lattice,
    QuotientLattice,
    clear_denominators,
    identity_matrix,
    invariant_factors,
    kernel_basis,
    kernel_mod,
    mat_mul,
    mat_vec,
    smith_normal_form,
    solve,
    valuation,
    xgcd,
)


def random_matrix(rng, m, n, lo=-9, hi=9):
    return [[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)]


def test_xgcd_contract():
    rng = random.Random(2024)
    for _ in range(300):
        a = rng.randint(-500, 500)
        b = rng.randint(-500, 500)
        g, x, y = xgcd(a, b)
        assert g == a * x + b * y
        assert g >= 0
        if a or b:
            assert a % g == 0 and b % g == 0


def test_valuation():
    assert valuation(45, 3) == 2
    assert valuation(-45, 3) == 2
    assert valuation(7, 3) == 0
    assert valuation(0, 3) == inf
    assert valuation(3**8, 3) == 8


def test_snf_frozen_examples():
    # diag verified by hand: gcd of entries 2, gcd of 2x2 minors 4, det 624.
    assert smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, 4, 16]]).diag == [2, 2, 156]
    assert smith_normal_form([[1, 0], [0, 1]]).diag == [1, 1]
    assert smith_normal_form([[0, 0], [0, 0]]).diag == [0, 0]
    # The classic 2x2 with determinant 0.
    assert smith_normal_form([[2, 4], [1, 2]]).diag == [1, 0]
    assert invariant_factors([[2, 0], [0, 3]]) == [6]
    assert invariant_factors([[4, 0, 0], [0, 6, 0]]) == [2, 12]


def test_snf_against_sympy_oracle():
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf

    rng = random.Random(7)
    for trial in range(60):
        m = rng.randint(1, 5)
        n = rng.randint(1, 5)
        a = random_matrix(rng, m, n)
        ours = smith_normal_form(a, with_transforms=False)
        theirs = sympy_snf(sympy.Matrix(a))
        diag_oracle = [abs(int(theirs[i, i])) for i in range(min(m, n))]
        assert ours.diag == diag_oracle, (trial, a)


def test_snf_transforms_are_consistent():
    rng = random.Random(11)
    for _ in range(40):
        m = rng.randint(1, 5)
        n = rng.randint(1, 5)
        a = random_matrix(rng, m, n)
        snf = smith_normal_form(a)
        d = mat_mul(mat_mul(snf.S, a), snf.T)
        for i in range(m):
            for j in range(n):
                expected = snf.diag[i] if i == j and i < len(snf.diag) else 0
                assert d[i][j] == expected
        # T * Tinv == identity
        assert mat_mul(snf.T, snf.Tinv) == identity_matrix(n)
        # divisibility chain
        for x, y in zip(snf.diag, snf.diag[1:]):
            if x:
                assert y % x == 0
            else:
                assert y == 0


def test_kernel_basis_properties():
    rng = random.Random(13)
    for _ in range(50):
        m = rng.randint(1, 4)
        n = rng.randint(1, 5)
        a = random_matrix(rng, m, n, -5, 5)
        ker = kernel_basis(a)
        for v in ker:
            assert mat_vec(a, v) == [0] * m
        # rank-nullity over Q
        rank = smith_normal_form(a, with_transforms=False).rank
        assert len(ker) == n - rank
        # saturation: if c*v in ker-span with c != 0 then v in ker-span
        if ker:
            lat = Lattice(ker)
            v = [sum(3 * row[j] for row in ker) for j in range(n)]
            assert lat.contains(v)


def test_kernel_of_empty_matrices():
    assert kernel_basis([]) == []
    assert kernel_basis([[0, 0]]) == [[1, 0], [0, 1]]


def test_solve_examples():
    assert solve([[2, 0], [0, 3]], [4, 9]) == [2, 3]
    assert solve([[2]], [3]) is None
    assert solve([[1, 1]], [5]) == [0, 5]
    assert solve([], []) == []
    # inconsistent overdetermined system
    assert solve([[1], [1]], [1, 2]) is None


def test_solve_random_roundtrip():
    rng = random.Random(17)
    for _ in range(60):
        m = rng.randint(1, 4)
        n = rng.randint(1, 5)
        a = random_matrix(rng, m, n, -4, 4)
        x0 = [rng.randint(-5, 5) for _ in range(n)]
        b = mat_vec(a, x0)
        x = solve(a, b)
        assert x is not None
        assert mat_vec(a, x) == b
        # canonical: solving twice gives the same representative
        assert solve(a, b) == x


def test_kernel_mod():
    basis = kernel_mod([[1, 1]], 2)
    lat = Lattice(basis)
    assert lat.contains([1, 1])
    assert lat.contains([2, 0])
    assert lat.contains([1, 3])
    assert not lat.contains([1, 0])
    # mod 1 everything is a solution
    assert Lattice(kernel_mod([[5, 7]], 1)).contains([1, 0])


def test_lattice_membership_and_reduce():
    lat = Lattice([[2, 0, 1], [0, 3, 1]])
    assert lat.contains([2, 3, 2])
    assert lat.contains([-2, 0, -1])
    assert not lat.contains([1, 0, 0])
    assert lat.reduce([5, 0, 2]) == [1, 0, 0]
    # reduce is idempotent
    assert lat.reduce(lat.reduce([7, 9, 5])) == lat.reduce([7, 9, 5])


def test_lattice_random_span_properties():
    rng = random.Random(23)
    for _ in range(40):
        n = rng.randint(1, 5)
        gens = [random_matrix(rng, 1, n, -6, 6)[0] for _ in range(rng.randint(0, 4))]
        lat = Lattice(gens)
        # every generator is a member; sums of generators are members
        for g in gens:
            assert lat.contains(g)
        if len(gens) >= 2:
            assert lat.contains([a + b for a, b in zip(gens[0], gens[1])])
        # rank bounded by dimension and generator count
        assert lat.rank <= min(n, len(gens))


def test_quotient_lattice_basic():
    # Z^2 / <(2,0),(0,9)> at p=3: unit factor 2 discarded, Z/9 kept.
    q = QuotientLattice(2, identity_matrix(2), [[2, 0], [0, 9]], prime=3)
    assert q.invariants().as_pair() == (0, (2,))
    assert q.is_zero([2, 0])  # 2 is a 3-local unit times the generator
    assert q.is_zero([0, 9])
    assert not q.is_zero([0, 3])


def test_quotient_lattice_free_and_mixed():
    # Z^3 / <(0, 3, 0)> = Z^2 + Z/3
    q = QuotientLattice(3, identity_matrix(3), [[0, 3, 0]], prime=3)
    assert q.invariants().as_pair() == (2, (1,))
    gens = q.generators()
    orders = sorted(d for _, d in gens)
    assert orders == [0, 0, 3]


def test_quotient_lattice_subquotient():
    # (span{(2,0),(0,1)} + span{(4,0)}) / span{(4,0)} = Z + Z/2
    q = QuotientLattice(2, [[2, 0], [0, 1]], [[4, 0]], prime=2)
    assert q.invariants().as_pair() == (1, (1,))
    assert q.is_zero([4, 0])
    assert not q.is_zero([2, 0])


def test_quotient_lattice_rejects_outside_vectors():
    q = QuotientLattice(2, [[2, 0]], [], prime=3)
    with pytest.raises(ValueError):
        q.class_coords([1, 0])
    assert q.contains([4, 0])
    assert not q.contains([1, 0])


def test_quotient_reduce_is_canonical():
    rng = random.Random(31)
    for _ in range(30):
        n = rng.randint(1, 4)
        num = [random_matrix(rng, 1, n, -4, 4)[0] for _ in range(rng.randint(1, 3))]
        den = [random_matrix(rng, 1, n, -4, 4)[0] for _ in range(rng.randint(0, 2))]
        q = QuotientLattice(n, num, den, prime=3)
        for v in num:
            r = q.reduce(v)
            assert q.reduce(r) == r
            # reduce lands in the same class
            assert q.is_zero([a - b for a, b in zip(v, r)])


def test_clear_denominators():
    assert clear_denominators([[Fraction(1, 2), 3]], prime=3) == [[1, 6]]
    with pytest.raises(ValueError):
        clear_denominators([[Fraction(1, 3)]], prime=3)


def test_group_invariants_str():
    assert str(GroupInvariants(0, ())) == "0"
    assert str(GroupInvariants(1, (1, 2))) == "Z + Z/p + Z/p^2"
    assert GroupInvariants(1, (2,)).torsion_length == 2
