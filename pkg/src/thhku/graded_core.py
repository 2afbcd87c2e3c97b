"""Graded abelian groups, monomial algebras, and p-local matrix reduction.

The building blocks shared by every computation in the package:

* :class:`GradedGroup` — a finitely generated graded abelian group recorded
  degreewise as p-local invariants (free rank plus a multiset of p-power
  torsion exponents).
* :class:`MonomialAlgebra` / :class:`Element` — free (graded-)commutative
  monomial algebras on named generators of four kinds: polynomial ``P``,
  truncated polynomial ``Pn`` (x^n = 0), exterior ``E``, and divided power
  ``Gamma`` (gamma_i * gamma_j = binom(i+j, i) gamma_{i+j}, cf. Weibel,
  "An Introduction to Homological Algebra", ex. 4.5.2).
* :class:`LocalMatrix` / :func:`smith_normal_form` / :func:`homology_at` —
  exact linear algebra over Z localized at p, via integer Smith normal form
  after clearing the (p-coprime) denominators.

Degrees are either integers or tuples of integers (added componentwise);
Koszul signs use the parity of the total degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from ._lattice import (
    GroupInvariants,
    QuotientLattice,
    clear_denominators,
    kernel_basis,
    mat_mul,
    smith_normal_form as _integer_snf,
    valuation,
)

__all__ = [
    "GradedGroup",
    "GroupInvariants",
    "MonomialAlgebra",
    "Element",
    "LocalMatrix",
    "SmithForm",
    "make_algebra",
    "basis_in_degree",
    "multiply",
    "smith_normal_form",
    "homology_at",
]


def _deg_add(a, b):
    if isinstance(a, tuple):
        return tuple(x + y for x, y in zip(a, b))
    return a + b


def _deg_scale(k: int, a):
    if isinstance(a, tuple):
        return tuple(k * x for x in a)
    return k * a


def _deg_total(a) -> int:
    return sum(a) if isinstance(a, tuple) else a


def _deg_zero(a):
    return tuple(0 for _ in a) if isinstance(a, tuple) else 0


def _deg_nonneg(a) -> bool:
    return all(x >= 0 for x in a) if isinstance(a, tuple) else a >= 0


class GradedGroup:
    """A graded abelian group, stored degreewise as p-local invariants.

    Keys may be integers (single grading) or tuples (bigraded).  Trivial
    components are normalized away, so two graded groups are equal exactly
    when all their components agree.

    >>> g = GradedGroup(3, {0: (1, ()), 5: (0, (1,)), 7: (0, ())})
    >>> g[0].free_rank, g[5].exponents
    (1, (1,))
    >>> g[7].is_trivial and g[123].is_trivial
    True
    >>> g == GradedGroup(3, {5: (0, (1,)), 0: (1, ())})
    True
    """

    def __init__(self, prime: int, components: dict | None = None):
        self.prime = prime
        self._data: dict = {}
        if components:
            for key, value in components.items():
                self.set(key, value)

    def set(self, key, value) -> None:
        if isinstance(value, GroupInvariants):
            inv = value
        else:
            free, exponents = value
            inv = GroupInvariants(free, tuple(sorted(exponents)))
        if inv.is_trivial:
            self._data.pop(key, None)
        else:
            self._data[key] = inv

    def __getitem__(self, key) -> GroupInvariants:
        return self._data.get(key, GroupInvariants(0, ()))

    def __contains__(self, key) -> bool:
        return key in self._data

    def degrees(self) -> list:
        return sorted(self._data)

    def items(self):
        return sorted(self._data.items())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GradedGroup)
            and self.prime == other.prime
            and self._data == other._data
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v}" for k, v in self.items())
        return f"GradedGroup(p={self.prime}, {{{inner}}})"

    def restrict(self, max_total: int) -> "GradedGroup":
        """Components of total degree <= max_total."""
        out = GradedGroup(self.prime)
        for key, value in self._data.items():
            if _deg_total(key) <= max_total:
                out.set(key, value)
        return out

    def merged(self, other: "GradedGroup") -> "GradedGroup":
        """Direct sum, degreewise."""
        if self.prime != other.prime:
            raise ValueError("cannot merge graded groups at different primes")
        out = GradedGroup(self.prime)
        for key in set(self._data) | set(other._data):
            a, b = self[key], other[key]
            out.set(key, (a.free_rank + b.free_rank, tuple(sorted(a.exponents + b.exponents))))
        return out


@dataclass(frozen=True)
class Generator:
    """One algebra generator: ``kind`` is 'P', 'Pn', 'E' or 'Gamma'.

    ``height`` bounds the exponent for 'Pn' (x^height = 0); 'E' is height 2;
    'P' and 'Gamma' are unbounded.
    """

    name: str
    degree: object
    kind: str
    height: int | None = None

    def max_exponent(self) -> int | None:
        if self.kind == "E":
            return 1
        if self.kind == "Pn":
            return self.height - 1
        return None

    @property
    def is_odd(self) -> bool:
        return _deg_total(self.degree) % 2 == 1


class MonomialAlgebra:
    """A graded-commutative monomial algebra on finitely many generators.

    Monomials are exponent tuples aligned with the generator list.  Divided
    power generators multiply with binomial coefficients; exterior squares
    and truncated-polynomial overflows vanish.

    >>> alg = make_algebra([("s", 3, "E"), ("u", 2, "P")])
    >>> basis_in_degree(alg, 7)
    [(1, 2)]
    >>> basis_in_degree(alg, 4)
    [(0, 2)]
    """

    def __init__(self, generators: list[Generator], prime: int | None = None):
        names = [g.name for g in generators]
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        for g in generators:
            if g.kind not in ("P", "Pn", "E", "Gamma"):
                raise ValueError(f"unknown generator kind {g.kind!r}")
            if g.kind == "Pn" and (g.height is None or g.height < 2):
                raise ValueError("'Pn' generators need height >= 2")
            if not _deg_nonneg(g.degree):
                raise ValueError("generator degrees must be non-negative")
        self.generators = tuple(generators)
        self.prime = prime
        self._index = {g.name: i for i, g in enumerate(generators)}

    def generator_index(self, name: str) -> int:
        return self._index[name]

    def monomial_degree(self, mono: tuple[int, ...]):
        deg = _deg_zero(self.generators[0].degree) if self.generators else 0
        for e, g in zip(mono, self.generators):
            if e:
                deg = _deg_add(deg, _deg_scale(e, g.degree))
        return deg

    def monomial_name(self, mono: tuple[int, ...]) -> str:
        parts = []
        for e, g in zip(mono, self.generators):
            if e == 0:
                continue
            if g.kind == "Gamma":
                parts.append(g.name if e == 1 else f"g{e}({g.name})")
            elif e == 1:
                parts.append(g.name)
            else:
                parts.append(f"{g.name}^{e}")
        return "*".join(parts) if parts else "1"

    def element(self, terms: dict | None = None) -> "Element":
        return Element(self, terms or {})

    def gen_element(self, name: str, exponent: int = 1) -> "Element":
        mono = [0] * len(self.generators)
        mono[self._index[name]] = exponent
        return Element(self, {tuple(mono): 1})

    def one(self) -> "Element":
        return Element(self, {tuple([0] * len(self.generators)): 1})


def make_algebra(generators, prime: int | None = None) -> MonomialAlgebra:
    """Build a :class:`MonomialAlgebra` from ``(name, degree, kind[, height])`` tuples.

    >>> alg = make_algebra([("x", 2, "Pn", 3), ("s", 3, "E")], prime=3)
    >>> [g.name for g in alg.generators]
    ['x', 's']
    """
    gens = []
    for spec in generators:
        if isinstance(spec, Generator):
            gens.append(spec)
        else:
            name, degree, kind = spec[0], spec[1], spec[2]
            height = spec[3] if len(spec) > 3 else None
            gens.append(Generator(name, degree, kind, height))
    return MonomialAlgebra(gens, prime=prime)


def basis_in_degree(algebra: MonomialAlgebra, degree) -> list[tuple[int, ...]]:
    """All monomials of the given (total or tuple) degree, in lex order.

    Exponent bounds (exterior, truncated) are enforced during enumeration.
    Raises ``ValueError`` when the degree-0 part is not finitely enumerable
    (an unbounded generator of degree zero).

    >>> alg = make_algebra([("a", 2, "P"), ("b", 2, "E")])
    >>> basis_in_degree(alg, 4)
    [(1, 1), (2, 0)]
    >>> basis_in_degree(alg, 3)
    []
    """
    for g in algebra.generators:
        if _deg_total(g.degree) == 0 and g.max_exponent() is None:
            raise ValueError(f"generator {g.name} has degree 0 and unbounded exponent")
    results: list[tuple[int, ...]] = []
    n = len(algebra.generators)

    def is_zero_degree(d) -> bool:
        return all(x == 0 for x in d) if isinstance(d, tuple) else d == 0

    def recurse(i: int, remaining, partial: list[int]) -> None:
        if i == n:
            if is_zero_degree(remaining):
                results.append(tuple(partial))
            return
        g = algebra.generators[i]
        cap = g.max_exponent()
        e = 0
        while True:
            rest = _deg_add(remaining, _deg_scale(-e, g.degree))
            if not _deg_nonneg(rest):
                break
            partial.append(e)
            recurse(i + 1, rest, partial)
            partial.pop()
            if cap is not None and e >= cap:
                break
            e += 1

    recurse(0, degree, [])
    return sorted(results)


def _wrong_exponent(algebra: MonomialAlgebra, mono: tuple[int, ...]) -> bool:
    for e, g in zip(mono, algebra.generators):
        cap = g.max_exponent()
        if cap is not None and e > cap:
            return True
    return False


def _koszul_sign(algebra: MonomialAlgebra, a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """Sign for merging monomial ``b`` into ``a`` (generator order fixed)."""
    sign = 0
    odd_a = [e % 2 if g.is_odd else 0 for e, g in zip(a, algebra.generators)]
    odd_b = [e % 2 if g.is_odd else 0 for e, g in zip(b, algebra.generators)]
    # move each odd generator of b left past the odd generators of a with
    # larger index
    suffix = 0
    for i in range(len(a) - 1, -1, -1):
        if odd_b[i]:
            sign += suffix * odd_b[i]
        suffix += odd_a[i]
    return -1 if sign % 2 else 1


class Element:
    """An element of a :class:`MonomialAlgebra`: a finite sum of monomials.

    >>> alg = make_algebra([("g", 2, "Gamma")])
    >>> g1 = alg.gen_element("g")
    >>> (g1 * g1).terms
    {(2,): 2}
    >>> alg2 = make_algebra([("s", 3, "E"), ("t", 5, "E")])
    >>> s, t = alg2.gen_element("s"), alg2.gen_element("t")
    >>> (s * t).terms == {(1, 1): 1} and (t * s).terms == {(1, 1): -1}
    True
    >>> (s * s).terms
    {}
    """

    def __init__(self, algebra: MonomialAlgebra, terms: dict):
        self.algebra = algebra
        clean = {}
        for mono, coeff in terms.items():
            if algebra.prime is not None:
                coeff %= algebra.prime
            if coeff and not _wrong_exponent(algebra, mono):
                clean[tuple(mono)] = coeff
        self.terms = clean

    def __add__(self, other: "Element") -> "Element":
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            out[mono] = out.get(mono, 0) + coeff
        return Element(self.algebra, out)

    def __neg__(self) -> "Element":
        return Element(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def scaled(self, k: int) -> "Element":
        return Element(self.algebra, {m: k * c for m, c in self.terms.items()})

    def __mul__(self, other: "Element") -> "Element":
        alg = self.algebra
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                coeff = ca * cb * _koszul_sign(alg, ma, mb)
                merged = tuple(x + y for x, y in zip(ma, mb))
                if _wrong_exponent(alg, merged):
                    continue
                # divided-power structure constants
                for i, g in enumerate(alg.generators):
                    if g.kind == "Gamma" and ma[i] and mb[i]:
                        coeff *= comb(ma[i] + mb[i], ma[i])
                out[merged] = out.get(merged, 0) + coeff
        return Element(alg, out)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self):
        """Degree if homogeneous, else raises."""
        degs = {self.algebra.monomial_degree(m) for m in self.terms}
        if len(degs) > 1:
            raise ValueError("inhomogeneous element")
        return degs.pop() if degs else None

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms):
            c = self.terms[mono]
            name = self.algebra.monomial_name(mono)
            parts.append(name if c == 1 else f"{c}*{name}")
        return " + ".join(parts)


def multiply(a: Element, b: Element) -> Element:
    """Product of two algebra elements (same as ``a * b``)."""
    return a * b


@dataclass
class SmithForm:
    """p-local Smith data of a matrix: its invariant factors read at p.

    ``exponents`` lists the positive p-adic valuations among the nonzero
    invariant factors (ascending); ``unit_rank`` counts the invariant
    factors that are p-local units (valuation 0).
    """

    prime: int
    nrows: int
    ncols: int
    rank: int
    unit_rank: int
    exponents: tuple[int, ...]

    def kernel_rank(self) -> int:
        return self.ncols - self.rank

    def cokernel(self) -> GroupInvariants:
        return GroupInvariants(self.nrows - self.rank, self.exponents)


class LocalMatrix:
    """A matrix over Z localized at p, with exact Fraction/int entries.

    Entries must be p-locally integral (denominators coprime to p).

    >>> m = LocalMatrix([[2, 0], [0, 9]], prime=3)
    >>> sf = m.smith()
    >>> sf.unit_rank, sf.exponents
    (1, (2,))
    >>> LocalMatrix([[Fraction(3, 2)]], prime=3).smith().exponents
    (1,)
    """

    def __init__(self, rows, prime: int):
        self.prime = prime
        self.rows = [list(r) for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0

    def integer_rows(self) -> list[list[int]]:
        return clear_denominators(self.rows, self.prime)

    def smith(self) -> SmithForm:
        cleared = self.integer_rows()
        snf = _integer_snf(cleared, with_transforms=False)
        exps = []
        units = 0
        for d in snf.diag:
            if d == 0:
                continue
            v = valuation(d, self.prime)
            if v == 0:
                units += 1
            else:
                exps.append(v)
        return SmithForm(
            prime=self.prime,
            nrows=self.nrows,
            ncols=self.ncols,
            rank=snf.rank,
            unit_rank=units,
            exponents=tuple(sorted(exps)),
        )


def smith_normal_form(matrix, prime: int) -> SmithForm:
    """p-local Smith form of a matrix given as rows of ints/Fractions.

    >>> smith_normal_form([[3, 0], [0, 5]], prime=5).exponents
    (1,)
    """
    if isinstance(matrix, LocalMatrix):
        return matrix.smith()
    return LocalMatrix(matrix, prime).smith()


def homology_at(d_in, d_out, prime: int, dim: int | None = None) -> GroupInvariants:
    """Homology ker(d_out)/im(d_in) at the middle of ``. -> C -> .``.

    ``d_in`` maps into C (it has one row per C-coordinate), ``d_out`` maps
    out of C (one column per C-coordinate); both may have Fraction entries
    with p-coprime denominators.  The composite must vanish.  ``dim`` is
    only needed when both matrices are empty.

    >>> h = homology_at([[2], [0]], [[0, 3]], prime=3)   # C = Z^2
    >>> h.as_pair()   # ker = Z{e1}, im = 2*Z{e1}: 2 is a 3-local unit
    (0, ())
    >>> homology_at([[9], [0]], [[0, 3]], prime=3).as_pair()
    (0, (2,))
    >>> homology_at([], [], prime=3, dim=2).as_pair()
    (2, ())
    """
    din = clear_denominators(d_in, prime) if d_in else []
    dout = clear_denominators(d_out, prime) if d_out else []
    if din:
        middle = len(din)
    elif dout and dout[0]:
        middle = len(dout[0])
    else:
        middle = dim or 0
    if dout and dout[0] and len(dout[0]) != middle:
        raise ValueError("dimension mismatch between d_in and d_out")
    if din and dout:
        comp = mat_mul(dout, din)
        if any(any(x for x in row) for row in comp):
            raise ValueError("d_out o d_in != 0")
    if dout and dout[0]:
        ker = kernel_basis(dout)
    else:
        ker = [[1 if i == j else 0 for j in range(middle)] for i in range(middle)]
    ncols_in = len(din[0]) if din and din[0] else 0
    image = [[din[i][j] for i in range(middle)] for j in range(ncols_in)]
    return QuotientLattice(middle, ker, image, prime=prime).invariants()
