"""Spectral sequences of bounded filtered chain complexes, in exact arithmetic.

A filtered complex here is a chain complex of finitely generated free
Z-modules together with a finite decreasing filtration

    C = F_{n_min} >= F_{n_min+1} >= ... >= F_{n_max} = 0

that the boundary respects.  Everything is presented by integer matrices;
groups are read off either p-locally (ring ``"Zp"``) or mod p (ring
``"Fp"``).  Pages are computed literally from the cycle approximations

    Z^r_{y,d} = { x in F_y /\\ C_d : dx in F_{y+r} },
    E^r_{y,d} = Z^r_{y,d} / (Z^{r-1}_{y+1,d} + d Z^{r-1}_{y-r+1,d+1}),

see Weibel, "An introduction to homological algebra", section 5.4, or
McCleary, "A user's guide to spectral sequences", Theorem 2.6.  Since the
filtration is finite, ``E^r`` is constant for ``r > n_max - n_min`` and equal
to the associated graded of homology; :func:`einfty_oracle` computes that
graded directly from cycles and boundaries, bypassing the page recursion, and
is the cross-check used throughout the test suite.

Beyond the pages the module works with the chain-level *relation* form of a
differential.  ``d^r([x]) = [y]`` holds at filtration level ``n`` exactly
when

    d(x + c - u2) = y + u1

is solvable with ``c in F_{n+1} /\\ C_d``, ``u1 in F_{n+r+1} /\\ C_{d-1}`` and
``u2 in F_{n+r} /\\ C_d`` (:func:`diff_relation`; ``y = 0`` decides whether
the class of ``x`` survives page ``r``).  On top of that sit level
truncation (:func:`truncate`), monotone regrouping of filtration levels
(:class:`GatherMap`, :func:`gather`), and :func:`transfer_check`, which
verifies on a concrete complex how differentials transfer between the
original filtration, its level truncations, and the gathered filtration.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ._lattice import (
    GroupInvariants,
    QuotientLattice,
    identity_matrix,
    kernel_basis,
    kernel_mod,
    mat_mul,
    mat_vec,
    solve,
)

__all__ = [
    "FilteredComplex",
    "Page",
    "PageCell",
    "PageDifferential",
    "GatherMap",
    "TransferReport",
    "ss_pages",
    "einfty_oracle",
    "truncate",
    "gather",
    "diff_relation",
    "transfer_check",
    "random_filtered_complex",
    "random_gather_map",
    "counterexample_fixture",
]

THEOREMS = ("short", "long", "back", "null_a", "null_b")


class FilteredComplex:
    """A bounded filtered chain complex presented by integer matrices.

    Per homological degree ``d`` the complex stores basis element names, the
    filtration level of each basis element, and the boundary matrix into
    degree ``d - 1`` (acting on coordinate columns).  ``F_y`` is spanned by
    the basis elements of level ``>= y``; levels live in ``[n_min, n_max)``
    and the boundary never lowers the level.  With ring ``"Fp"`` all matrix
    entries are reduced mod p and kernels/images are taken mod p.

    >>> fc = FilteredComplex(3, {0: ["b"], 1: ["a"]}, {0: [2], 1: [0]},
    ...                      {1: [[9]]}, (0, 3))
    >>> fc.span, fc.degrees(), fc.dim(1)
    (3, [0, 1], 1)
    >>> fc.boundary_map(1, [1])
    [9]
    """

    def __init__(self, prime, names, levels, boundaries, window, ring="Zp"):
        if ring not in ("Zp", "Fp"):
            raise ValueError(f"unknown ring {ring!r}")
        if prime < 2:
            raise ValueError("prime must be at least 2")
        n_min, n_max = window
        if n_min >= n_max:
            raise ValueError("window must be a nonempty interval [n_min, n_max)")
        if set(names) != set(levels):
            raise ValueError("names and levels must cover the same degrees")
        self.prime = prime
        self.ring = ring
        self.n_min = n_min
        self.n_max = n_max
        self._names: dict[int, list[str]] = {}
        self._levels: dict[int, list[int]] = {}
        for d in names:
            if len(names[d]) != len(levels[d]):
                raise ValueError(f"degree {d}: names and levels disagree in length")
            if len(set(names[d])) != len(names[d]):
                raise ValueError(f"degree {d}: duplicate basis names")
            for lev in levels[d]:
                if not n_min <= lev < n_max:
                    raise ValueError(f"degree {d}: level {lev} outside window")
            if names[d]:
                self._names[d] = list(names[d])
                self._levels[d] = list(levels[d])
        self._bnd: dict[int, list[list[int]]] = {}
        for d in self._names:
            rows, cols = self.dim(d - 1), self.dim(d)
            mat = boundaries.get(d) if boundaries else None
            if mat is None:
                mat = [[0] * cols for _ in range(rows)]
            if len(mat) != rows or any(len(row) != cols for row in mat):
                raise ValueError(f"degree {d}: boundary matrix has wrong shape")
            mat = [list(row) for row in mat]
            if ring == "Fp":
                mat = [[x % prime for x in row] for row in mat]
            for i in range(rows):
                for j in range(cols):
                    if mat[i][j] and self._levels[d - 1][i] < self._levels[d][j]:
                        raise ValueError(
                            f"boundary lowers filtration level at degree {d}, "
                            f"entry ({i}, {j})"
                        )
            self._bnd[d] = mat
        for d in self._names:
            if self.dim(d - 1) and self.dim(d - 2):
                prod = mat_mul(self.boundary(d - 1), self.boundary(d))
                bad = any(
                    (x % prime if ring == "Fp" else x) != 0 for row in prod for x in row
                )
                if bad:
                    raise ValueError(f"boundary squared is nonzero at degree {d}")

    @property
    def span(self) -> int:
        return self.n_max - self.n_min

    def degrees(self) -> list[int]:
        return sorted(self._names)

    def dim(self, d: int) -> int:
        return len(self._names.get(d, ()))

    def basis_names(self, d: int) -> list[str]:
        return self._names.get(d, [])

    def basis_levels(self, d: int) -> list[int]:
        return self._levels.get(d, [])

    def boundary(self, d: int) -> list[list[int]]:
        """Boundary matrix C_d -> C_{d-1} (dim(d-1) rows, dim(d) columns)."""
        mat = self._bnd.get(d)
        if mat is None:
            return [[0] * self.dim(d) for _ in range(self.dim(d - 1))]
        return mat

    def boundary_map(self, d: int, vec: list[int]) -> list[int]:
        if self.dim(d - 1) == 0:
            return []
        return mat_vec(self.boundary(d), vec)

    def element(self, d: int, name: str) -> list[int]:
        """Unit coordinate vector of a named basis element."""
        j = self._names[d].index(name)
        return [1 if i == j else 0 for i in range(self.dim(d))]

    def indices_at_least(self, d: int, y: int) -> list[int]:
        return [j for j, lev in enumerate(self.basis_levels(d)) if lev >= y]

    def chain_level(self, d: int, vec: list[int]) -> int | None:
        """Deepest y with vec in F_y, or None for the zero chain."""
        levs = [
            lev
            for lev, c in zip(self.basis_levels(d), vec)
            if (c % self.prime if self.ring == "Fp" else c) != 0
        ]
        return min(levs) if levs else None

    def is_zero_chain(self, d: int, vec: list[int]) -> bool:
        if self.ring == "Fp":
            return all(c % self.prime == 0 for c in vec)
        return all(c == 0 for c in vec)

    def reduce_chain(self, vec: list[int]) -> list[int]:
        """Entrywise mod-p reduction in Fp mode (drops multiples of p that sit
        at spuriously shallow levels); the identity over Zp."""
        if self.ring == "Fp":
            return [c % self.prime for c in vec]
        return vec


def _unit(n: int, i: int, scale: int = 1) -> list[int]:
    v = [0] * n
    v[i] = scale
    return v


def _z_basis(fc: FilteredComplex, d: int, y: int, r: int) -> list[list[int]]:
    """Ambient basis of Z^r_{y,d} (of F_y for r <= 0)."""
    dim_d = fc.dim(d)
    if dim_d == 0:
        return []
    cols = fc.indices_at_least(d, y)
    if not cols:
        return []
    if r <= 0 or fc.dim(d - 1) == 0:
        return [_unit(dim_d, j) for j in cols]
    bnd = fc.boundary(d)
    rows = [i for i, lev in enumerate(fc.basis_levels(d - 1)) if lev < y + r]
    if not rows:
        return [_unit(dim_d, j) for j in cols]
    sub = [[bnd[i][j] for j in cols] for i in rows]
    if fc.ring == "Fp":
        ker = kernel_mod(sub, fc.prime)
    else:
        ker = kernel_basis(sub)
    out = []
    for k in ker:
        v = [0] * dim_d
        for t, j in enumerate(cols):
            v[j] = k[t]
        out.append(v)
    return out


@dataclass
class PageCell:
    """One nontrivial spot of a page, with its generators."""

    level: int
    degree: int
    invariants: GroupInvariants
    gens: list[tuple[list[int], int]]
    quot: QuotientLattice


@dataclass
class PageDifferential:
    """Matrix of d^r between two cells, columns indexed by source generators."""

    r: int
    source: tuple[int, int]
    target: tuple[int, int]
    matrix: list[list[int]]


@dataclass
class Page:
    """Page r of the spectral sequence: cells keyed by (level, degree), and
    the nonzero differentials between them."""

    r: int
    cells: dict[tuple[int, int], PageCell]
    differentials: list[PageDifferential] = field(default_factory=list)

    def group(self, level: int, degree: int) -> GroupInvariants:
        cell = self.cells.get((level, degree))
        return cell.invariants if cell else GroupInvariants(0, ())


def ss_pages(fc: FilteredComplex, r_max: int | None = None) -> list[Page]:
    """Pages E^1 .. E^{r_max} of the filtered complex.

    The default ``r_max = span + 1`` reaches the stable page: differentials
    of the final page would jump out of the level window, so it equals
    ``E^infinity`` and matches :func:`einfty_oracle`.

    >>> fc = FilteredComplex(3, {0: ["b"], 1: ["a"]}, {0: [2], 1: [0]},
    ...                      {1: [[9]]}, (0, 3))
    >>> pages = ss_pages(fc)
    >>> sorted(pages[0].cells)
    [(0, 1), (2, 0)]
    >>> pages[1].differentials[0].matrix
    [[9]]
    >>> str(pages[-1].cells[(2, 0)].invariants)
    'Z/p^2'
    >>> (0, 1) in pages[-1].cells
    False
    """
    if r_max is None:
        r_max = fc.span + 1
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    memo: dict[tuple[int, int, int], list[list[int]]] = {}

    def zb(d: int, y: int, r: int) -> list[list[int]]:
        key = (d, y, r)
        if key not in memo:
            memo[key] = _z_basis(fc, d, y, r)
        return memo[key]

    pages = []
    for r in range(1, r_max + 1):
        cells: dict[tuple[int, int], PageCell] = {}
        for d in fc.degrees():
            dim_d = fc.dim(d)
            for y in range(fc.n_min, fc.n_max):
                num = zb(d, y, r)
                if not num:
                    continue
                den = list(zb(d, y + 1, r - 1))
                den += [fc.boundary_map(d + 1, v) for v in zb(d + 1, y - r + 1, r - 1)]
                if fc.ring == "Fp":
                    den += [_unit(dim_d, j, fc.prime) for j in fc.indices_at_least(d, y)]
                quot = QuotientLattice(dim_d, num, den, prime=fc.prime)
                gens = quot.generators()
                if gens:
                    cells[(y, d)] = PageCell(y, d, quot.invariants(), gens, quot)
        diffs = []
        for (y, d), cell in sorted(cells.items()):
            tgt = cells.get((y + r, d - 1))
            if tgt is None:
                continue
            cols = [
                tgt.quot.class_in_generators(fc.reduce_chain(fc.boundary_map(d, g)))
                for g, _ in cell.gens
            ]
            if all(all(c == 0 for c in col) for col in cols):
                continue
            matrix = [[col[i] for col in cols] for i in range(len(tgt.gens))]
            diffs.append(PageDifferential(r, (y, d), (y + r, d - 1), matrix))
        pages.append(Page(r, cells, diffs))
    return pages


def einfty_oracle(fc: FilteredComplex) -> dict[tuple[int, int], GroupInvariants]:
    """Associated graded of homology, computed without the page recursion.

    For each level y and degree d this is ``(Z /\\ F_y + B) / (Z /\\ F_{y+1} + B)``
    with Z the cycles and B the boundaries; only nontrivial spots appear.

    >>> fc = FilteredComplex(3, {0: ["b"], 1: ["a"]}, {0: [2], 1: [0]},
    ...                      {1: [[9]]}, (0, 3))
    >>> {spot: str(g) for spot, g in einfty_oracle(fc).items()}
    {(2, 0): 'Z/p^2'}
    """
    out: dict[tuple[int, int], GroupInvariants] = {}
    deep = fc.span + 1
    for d in fc.degrees():
        dim_d = fc.dim(d)
        bup = fc.boundary(d + 1)
        bcols = [[bup[i][j] for i in range(dim_d)] for j in range(fc.dim(d + 1))]
        for y in range(fc.n_min, fc.n_max):
            num = _z_basis(fc, d, y, deep)
            if not num:
                continue
            den = _z_basis(fc, d, y + 1, deep) + bcols
            if fc.ring == "Fp":
                den += [_unit(dim_d, i, fc.prime) for i in range(dim_d)]
            inv = QuotientLattice(dim_d, num, den, prime=fc.prime).invariants()
            if not inv.is_trivial:
                out[(y, d)] = inv
    return out


def _kept_indices(fc: FilteredComplex, d: int, lo: int, hi: int) -> list[int]:
    return [j for j, lev in enumerate(fc.basis_levels(d)) if lo <= lev < hi]


def truncate(fc: FilteredComplex, lo: int, hi: int) -> FilteredComplex:
    """Subquotient complex spanned by the basis elements of level in [lo, hi).

    Levels below ``lo`` are quotiented away, levels at or above ``hi`` form a
    subcomplex that is dropped; the result is again a filtered complex, with
    window [lo, hi).
    """
    lo = max(lo, fc.n_min)
    hi = min(hi, fc.n_max)
    if lo >= hi:
        raise ValueError("empty truncation window")
    names, levels, bnds = {}, {}, {}
    kept = {d: _kept_indices(fc, d, lo, hi) for d in fc.degrees()}
    for d in fc.degrees():
        names[d] = [fc.basis_names(d)[j] for j in kept[d]]
        levels[d] = [fc.basis_levels(d)[j] for j in kept[d]]
        bnd = fc.boundary(d)
        bnds[d] = [[bnd[i][j] for j in kept[d]] for i in kept.get(d - 1, [])]
    return FilteredComplex(fc.prime, names, levels, bnds, (lo, hi), fc.ring)


def _project(fc: FilteredComplex, d: int, vec: list[int], lo: int, hi: int) -> list[int]:
    """Coordinates of a chain in the truncation ``truncate(fc, lo, hi)``."""
    return [vec[j] for j in _kept_indices(fc, d, lo, hi)]


def _embed(fc: FilteredComplex, d: int, vec: list[int], lo: int, hi: int) -> list[int]:
    """Inverse of :func:`_project` on chains supported in [lo, hi)."""
    out = [0] * fc.dim(d)
    for c, j in zip(vec, _kept_indices(fc, d, lo, hi)):
        out[j] = c
    return out


class GatherMap:
    """Strictly increasing relabeling of filtration levels.

    The map is given by explicit values on a contiguous range of integers and
    extended affinely on both sides with integer slopes >= 1.  Regrouping a
    filtration along phi sends an old level ``l`` to the block index
    :meth:`inverse_level`, the largest ``m`` with ``phi(m) <= l``.

    >>> phi = GatherMap({0: 0, 1: 3, 2: 7})
    >>> [phi(n) for n in (-1, 0, 1, 2, 3)]
    [-1, 0, 3, 7, 8]
    >>> [phi.inverse_level(v) for v in (0, 2, 3, 6, 7)]
    [0, 0, 1, 1, 2]
    >>> GatherMap.identity()(5)
    5
    """

    def __init__(self, table: dict[int, int], left_slope: int = 1, right_slope: int = 1):
        if not table:
            raise ValueError("anchor table must be nonempty")
        keys = sorted(table)
        if keys != list(range(keys[0], keys[-1] + 1)):
            raise ValueError("anchor keys must be contiguous")
        values = [table[k] for k in keys]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("anchor values must be strictly increasing")
        if left_slope < 1 or right_slope < 1:
            raise ValueError("tail slopes must be at least 1")
        self._lo = keys[0]
        self._hi = keys[-1]
        self._table = dict(table)
        self._left = left_slope
        self._right = right_slope

    @classmethod
    def identity(cls) -> "GatherMap":
        return cls({0: 0})

    @classmethod
    def linear(cls, slope: int, offset: int = 0) -> "GatherMap":
        return cls({0: offset}, left_slope=slope, right_slope=slope)

    def __call__(self, n: int) -> int:
        if n < self._lo:
            return self._table[self._lo] - (self._lo - n) * self._left
        if n > self._hi:
            return self._table[self._hi] + (n - self._hi) * self._right
        return self._table[n]

    def inverse_level(self, value: int) -> int:
        """Largest m with phi(m) <= value."""
        top = self._table[self._hi]
        if value >= top:
            return self._hi + (value - top) // self._right
        bottom = self._table[self._lo]
        if value < bottom:
            a = bottom - value
            return self._lo - (a + self._left - 1) // self._left
        for m in range(self._hi, self._lo - 1, -1):
            if self._table[m] <= value:
                return m
        raise AssertionError("unreachable")


def gather(fc: FilteredComplex, phi: GatherMap) -> FilteredComplex:
    """Regroup filtration levels into blocks: new level of a basis element is
    the index of the phi-block its old level lies in."""
    names = {d: list(fc.basis_names(d)) for d in fc.degrees()}
    levels = {
        d: [phi.inverse_level(lev) for lev in fc.basis_levels(d)] for d in fc.degrees()
    }
    bnds = {d: fc.boundary(d) for d in fc.degrees()}
    lo = phi.inverse_level(fc.n_min)
    hi = phi.inverse_level(fc.n_max - 1) + 1
    return FilteredComplex(fc.prime, names, levels, bnds, (lo, hi), fc.ring)


def _solvable(columns: list[list[int]], rhs: list[int], prime: int | None) -> bool:
    """Is rhs an integer combination of the columns (mod prime if given)?"""
    rows = len(rhs)
    if prime is not None:
        columns = columns + [_unit(rows, i, prime) for i in range(rows)]
    if rows == 0:
        return True
    if not columns:
        return all(c == 0 for c in rhs)
    a = [[col[i] for col in columns] for i in range(rows)]
    return solve(a, rhs, canonical=False) is not None


def _solve_columns(
    columns: list[list[int]], rhs: list[int], prime: int | None
) -> list[int] | None:
    """Canonical coefficients on the columns solving ``cols @ x = rhs``.

    Mod-p slack columns are appended in Fp mode; the returned coefficient list
    is truncated back to the original columns.
    """
    rows = len(rhs)
    ncols = len(columns)
    all_cols = list(columns)
    if prime is not None:
        all_cols += [_unit(rows, i, prime) for i in range(rows)]
    if rows == 0:
        return [0] * ncols
    if not all_cols:
        return [0] * ncols if all(c == 0 for c in rhs) else None
    a = [[col[i] for col in all_cols] for i in range(rows)]
    sol = solve(a, rhs)
    if sol is None:
        return None
    return sol[:ncols]


def diff_relation(
    fc: FilteredComplex,
    d: int,
    level: int,
    r: int,
    x: list[int],
    y: list[int] | None = None,
) -> bool:
    """Decide the page-r differential relation d^r([x]) = [y] at a level.

    The relation holds iff ``d(x + c - u2) = y + u1`` has a solution with
    ``c in F_{level+1}``, ``u1 in F_{level+r+1}`` and ``u2 in F_{level+r}``.
    With ``y = None`` (the zero chain) this decides whether the class of x
    survives to page ``r + 1`` unchanged -- i.e. all of d^1 .. d^r vanish on
    it in the relation sense.  Chains must be supported in F_level and
    F_{level+r} respectively.

    >>> fc = FilteredComplex(3, {0: ["b"], 1: ["a"]}, {0: [2], 1: [0]},
    ...                      {1: [[9]]}, (0, 3))
    >>> diff_relation(fc, 1, 0, 2, [1], [9])
    True
    >>> diff_relation(fc, 1, 0, 2, [1])
    False
    >>> diff_relation(fc, 1, 0, 1, [1])
    True
    """
    if r < 1:
        raise ValueError("page index r must be at least 1")
    dim_d, dim_t = fc.dim(d), fc.dim(d - 1)
    if len(x) != dim_d:
        raise ValueError("x has the wrong length")
    if fc.chain_level(d, x) is not None and fc.chain_level(d, x) < level:
        raise ValueError("x is not supported in F_level")
    if y is None:
        y = [0] * dim_t
    if len(y) != dim_t:
        raise ValueError("y has the wrong length")
    ylev = fc.chain_level(d - 1, y)
    if ylev is not None and ylev < level + r:
        raise ValueError("y is not supported in F_{level+r}")
    if dim_t == 0:
        return True
    bnd = fc.boundary(d)
    dx = fc.boundary_map(d, x)
    rhs = [yi - zi for yi, zi in zip(y, dx)]
    columns = []
    for j in fc.indices_at_least(d, level + 1):
        columns.append([bnd[i][j] for i in range(dim_t)])
    for i in fc.indices_at_least(d - 1, level + r + 1):
        columns.append(_unit(dim_t, i))
    for j in fc.indices_at_least(d, level + r):
        columns.append([bnd[i][j] for i in range(dim_t)])
    prime = fc.prime if fc.ring == "Fp" else None
    return _solvable(columns, rhs, prime)


# ---------------------------------------------------------------------------
# Transfer of differentials between a filtration, its truncations, and its
# gathered regrouping.
# ---------------------------------------------------------------------------


@dataclass
class TransferReport:
    """Outcome of one transfer_check run."""

    theorem: str
    instances: int
    checks: int
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


class _TransferContext:
    """Shared lazily-computed data for the transfer checkers."""

    def __init__(self, fc: FilteredComplex, phi: GatherMap):
        self.fc = fc
        self.phi = phi
        self.gfc = gather(fc, phi)
        self._b_pages: list[Page] | None = None
        self._g_pages: list[Page] | None = None
        self._trunc: dict[int, FilteredComplex | None] = {}
        self._t_pages: dict[int, list[Page]] = {}

    @property
    def b_pages(self) -> list[Page]:
        if self._b_pages is None:
            self._b_pages = ss_pages(self.fc)
        return self._b_pages

    @property
    def g_pages(self) -> list[Page]:
        if self._g_pages is None:
            self._g_pages = ss_pages(self.gfc)
        return self._g_pages

    def block(self, level: int) -> int:
        return self.phi.inverse_level(level)

    def block_bounds(self, n_block: int) -> tuple[int, int] | None:
        lo = max(self.phi(n_block), self.fc.n_min)
        hi = min(self.phi(n_block + 1), self.fc.n_max)
        return (lo, hi) if lo < hi else None

    def trunc(self, n_block: int) -> FilteredComplex | None:
        if n_block not in self._trunc:
            bounds = self.block_bounds(n_block)
            self._trunc[n_block] = truncate(self.fc, *bounds) if bounds else None
        return self._trunc[n_block]

    def trunc_pages(self, n_block: int) -> list[Page]:
        if n_block not in self._t_pages:
            self._t_pages[n_block] = ss_pages(self.trunc(n_block))
        return self._t_pages[n_block]


def _check_short(ctx: _TransferContext, cap: int) -> TransferReport:
    """Differentials staying inside one block agree, as relations, between the
    full filtration and the block's truncation -- in both directions."""
    rep = TransferReport("short", 0, 0)
    fc, phi = ctx.fc, ctx.phi
    for page in ctx.b_pages:
        r = page.r
        with_diff = set()
        for diff in page.differentials:
            y, d = diff.source
            m = y + r
            if ctx.block(y) != ctx.block(m):
                continue
            with_diff.add((y, d))
            n_block = ctx.block(y)
            lo, hi = ctx.block_bounds(n_block)
            tfc = ctx.trunc(n_block)
            tgt = page.cells[diff.target]
            for j, (g, _) in enumerate(page.cells[(y, d)].gens):
                if rep.instances >= cap:
                    return rep
                rep.instances += 1
                col = [diff.matrix[i][j] for i in range(len(tgt.gens))]
                t = tgt.quot.reduce(fc.reduce_chain(fc.boundary_map(d, g)))
                g_t = _project(fc, d, g, lo, hi)
                t_t = _project(fc, d - 1, t, lo, hi)
                for label, ok in (
                    ("relation in full complex", diff_relation(fc, d, y, r, g, t)),
                    ("relation in truncation", diff_relation(tfc, d, y, r, g_t, t_t)),
                ):
                    rep.checks += 1
                    if not ok:
                        rep.failures.append(f"short d^{r} at {(y, d)} gen {j}: {label}")
                if any(col):
                    for label, bad in (
                        ("zero relation in full complex", diff_relation(fc, d, y, r, g)),
                        ("zero relation in truncation", diff_relation(tfc, d, y, r, g_t)),
                    ):
                        rep.checks += 1
                        if bad:
                            rep.failures.append(
                                f"short d^{r} at {(y, d)} gen {j}: {label} "
                                "holds despite nonzero differential"
                            )
        for (y, d), cell in sorted(page.cells.items()):
            if (y, d) in with_diff:
                continue
            m = y + r
            if not (fc.n_min <= m < fc.n_max) or ctx.block(y) != ctx.block(m):
                continue
            n_block = ctx.block(y)
            lo, hi = ctx.block_bounds(n_block)
            tfc = ctx.trunc(n_block)
            for j, (g, _) in enumerate(cell.gens):
                if rep.instances >= cap:
                    return rep
                rep.instances += 1
                g_t = _project(fc, d, g, lo, hi)
                for label, ok in (
                    ("zero relation in full complex", diff_relation(fc, d, y, r, g)),
                    ("zero relation in truncation", diff_relation(tfc, d, y, r, g_t)),
                ):
                    rep.checks += 1
                    if not ok:
                        rep.failures.append(
                            f"short vanishing d^{r} at {(y, d)} gen {j}: {label}"
                        )
    return rep


def _check_long(ctx: _TransferContext, cap: int) -> TransferReport:
    """A differential crossing blocks forces: the source survives to
    E^infinity of its block's truncation, the literal boundary survives in the
    target block's truncation, and the gathered sequence carries the relation
    as a d^{M-N}."""
    rep = TransferReport("long", 0, 0)
    fc = ctx.fc
    for page in ctx.b_pages:
        r = page.r
        for diff in page.differentials:
            y, d = diff.source
            m = y + r
            n_blk, m_blk = ctx.block(y), ctx.block(m)
            if m_blk <= n_blk:
                continue
            tgt = page.cells[diff.target]
            n_lo, n_hi = ctx.block_bounds(n_blk)
            m_lo, m_hi = ctx.block_bounds(m_blk)
            for j, (g, _) in enumerate(page.cells[(y, d)].gens):
                col = [diff.matrix[i][j] for i in range(len(tgt.gens))]
                if not any(col):
                    continue
                if rep.instances >= cap:
                    return rep
                rep.instances += 1
                z = fc.reduce_chain(fc.boundary_map(d, g))
                g_n = _project(fc, d, g, n_lo, n_hi)
                z_m = _project(fc, d - 1, z, m_lo, m_hi)
                tn = ctx.trunc(n_blk)
                where = f"long d^{r} at {(y, d)} gen {j}"

                rep.checks += 1
                if not tn.is_zero_chain(d - 1, tn.boundary_map(d, g_n)):
                    rep.failures.append(f"{where}: source not closed in its block")
                rep.checks += 1
                cell = ctx.trunc_pages(n_blk)[-1].cells.get((y, d))
                if cell is None or cell.quot.is_zero(g_n):
                    rep.failures.append(f"{where}: source dies in its block truncation")
                rep.checks += 1
                cell = ctx.trunc_pages(m_blk)[-1].cells.get((m, d - 1))
                if cell is None or cell.quot.is_zero(z_m):
                    rep.failures.append(f"{where}: boundary dies in target block")
                rep.checks += 1
                if not diff_relation(ctx.gfc, d, n_blk, m_blk - n_blk, g, z):
                    rep.failures.append(f"{where}: gathered relation fails")
    return rep


def _deepest_boundary_level(
    ctx: _TransferContext, d: int, x: list[int], n_block: int
) -> tuple[int, list[int]]:
    """Max over w in F_{phi(N+1)} of the level of d(x - w), with the witness
    boundary d(x - w) for the canonical deepest w.  Level n_max + 1 encodes
    the zero boundary."""
    fc = ctx.fc
    cut = ctx.phi(n_block + 1)
    dx = fc.boundary_map(d, x)
    bnd = fc.boundary(d)
    dim_t = fc.dim(d - 1)
    wcols = [
        [bnd[i][j] for i in range(dim_t)] for j in fc.indices_at_least(d, cut)
    ]
    prime = fc.prime if fc.ring == "Fp" else None
    for lev in range(fc.n_max + 1, fc.n_min - 1, -1):
        rows = [i for i, l in enumerate(fc.basis_levels(d - 1)) if l < lev]
        rhs = [dx[i] for i in rows]
        cols = [[c[i] for i in rows] for c in wcols]
        sol = _solve_columns(cols, rhs, prime)
        if sol is None:
            continue
        w = [0] * fc.dim(d)
        for c, j in zip(sol, fc.indices_at_least(d, cut)):
            w[j] = c
        dw = fc.boundary_map(d, w)
        return lev, fc.reduce_chain([a - b for a, b in zip(dx, dw)])
    raise AssertionError("unreachable: level n_min + 1 is always solvable")


def _check_back(ctx: _TransferContext, cap: int) -> TransferReport:
    """Every nonzero gathered differential is witnessed by an honest
    differential of the original filtration: from a gathered d^{M-N} on X one
    finds a lift at some level n' inside block N supporting a nonzero
    d^{m-n'} landing in block M."""
    rep = TransferReport("back", 0, 0)
    fc, phi = ctx.fc, ctx.phi
    prime = fc.prime if fc.ring == "Fp" else None
    for page in ctx.g_pages:
        for diff in page.differentials:
            n_blk, d = diff.source
            m_blk = n_blk + page.r
            tgt = page.cells[diff.target]
            for j, (x, _) in enumerate(page.cells[diff.source].gens):
                col = [diff.matrix[i][j] for i in range(len(tgt.gens))]
                if not any(col):
                    continue
                if rep.instances >= cap:
                    return rep
                rep.instances += 1
                where = f"back gathered d^{page.r} at {(n_blk, d)} gen {j}"
                m, z = _deepest_boundary_level(ctx, d, x, n_blk)
                rep.checks += 1
                if not (phi(m_blk) <= m < phi(m_blk + 1)):
                    rep.failures.append(f"{where}: deepest boundary level {m} "
                                        f"escapes block {m_blk}")
                    continue
                n_x = fc.chain_level(d, x)
                cut = min(phi(n_blk + 1), fc.n_max)
                bnd = fc.boundary(d)
                dim_t = fc.dim(d - 1)
                found = None
                for lev in range(cut - 1, fc.n_min - 1, -1):
                    cols = [
                        [bnd[i][j2] for i in range(dim_t)]
                        for j2 in fc.indices_at_least(d, lev)
                    ]
                    sol = _solve_columns(cols, z, prime)
                    if sol is not None:
                        lift = [0] * fc.dim(d)
                        for c, j2 in zip(sol, fc.indices_at_least(d, lev)):
                            lift[j2] = c
                        found = (lev, lift)
                        break
                rep.checks += 1
                if found is None:
                    rep.failures.append(f"{where}: no lift of the boundary in block")
                    continue
                n_prime, lift = found
                if not (n_x <= n_prime < phi(n_blk + 1)):
                    rep.failures.append(f"{where}: lift level {n_prime} out of range")
                    continue
                rep.checks += 1
                if not diff_relation(fc, d, n_prime, m - n_prime, lift, z):
                    rep.failures.append(f"{where}: lifted relation fails")
                rep.checks += 1
                b_page = ctx.b_pages[m - n_prime - 1]
                cell = b_page.cells.get((m, d - 1))
                if cell is None or cell.quot.is_zero(z):
                    rep.failures.append(f"{where}: boundary class is zero on page "
                                        f"{m - n_prime}")
    return rep


def _rep_at_level(
    tfc: FilteredComplex, d: int, x: list[int], n: int
) -> list[int] | None:
    """A chain x + boundary supported in F_n of the truncated complex, if the
    homology class of the cycle x lies that deep; canonical when it exists."""
    prime = tfc.prime if tfc.ring == "Fp" else None
    rows = [i for i, lev in enumerate(tfc.basis_levels(d)) if lev < n]
    if not rows:
        return list(x)
    bnd = tfc.boundary(d + 1)
    cols = [[bnd[i][j] for i in rows] for j in range(tfc.dim(d + 1))]
    rhs = [-x[i] for i in rows]
    sol = _solve_columns(cols, rhs, prime)
    if sol is None:
        return None
    corr = tfc.boundary_map(d + 1, sol) if tfc.dim(d + 1) else [0] * tfc.dim(d)
    return [a + b for a, b in zip(x, corr)]


def _check_null_a(ctx: _TransferContext, cap: int) -> TransferReport:
    """A gathered class that is a cycle through page M - N kills, for every
    level-n representative of its block-truncation class, all relation
    differentials d^{m-n} with n < m < phi(M+1).

    The upper endpoint is strict: at m = phi(M+1) the conclusion can fail
    (the gathered hypothesis does not see where inside block M + 1 the
    boundary of a representative lands), so that endpoint is excluded here.
    """
    rep = TransferReport("null_a", 0, 0)
    fc, phi, gfc = ctx.fc, ctx.phi, ctx.gfc
    for (n_blk, d), cell in sorted(ctx.g_pages[0].cells.items()):
        bounds = ctx.block_bounds(n_blk)
        if bounds is None:
            continue
        lo, hi = bounds
        tfc = ctx.trunc(n_blk)
        for j, (x, _) in enumerate(cell.gens):
            if rep.instances >= cap:
                return rep
            rho_max = 0
            for rho in range(1, gfc.span + 1):
                if not diff_relation(gfc, d, n_blk, rho, x):
                    break
                rho_max = rho
            if rho_max == 0:
                continue
            rep.instances += 1
            m_blk = n_blk + rho_max
            m_hi = min(phi(m_blk + 1), fc.n_max + 1)
            x_t = _project(fc, d, x, lo, hi)
            for n in range(lo, hi):
                x_hat_t = _rep_at_level(tfc, d, x_t, n)
                if x_hat_t is None:
                    continue
                x_hat = _embed(fc, d, x_hat_t, lo, hi)
                for m in range(n + 1, m_hi):
                    rep.checks += 1
                    if not diff_relation(fc, d, n, m - n, x_hat):
                        rep.failures.append(
                            f"null_a at gathered {(n_blk, d)} gen {j}: representative "
                            f"at level {n} supports a d^{m - n}"
                        )
    return rep


def _check_null_b(ctx: _TransferContext, cap: int) -> TransferReport:
    """A level-n class killing all differentials up to some m deep enough
    that phi(M+1) <= m for a block M > N extends to a block-truncation class
    that is an (M - N)-cycle of the gathered sequence."""
    rep = TransferReport("null_b", 0, 0)
    fc, phi = ctx.fc, ctx.phi
    prime = fc.prime if fc.ring == "Fp" else None
    for (n, d), cell in sorted(ctx.b_pages[0].cells.items()):
        n_blk = ctx.block(n)
        bounds = ctx.block_bounds(n_blk)
        if bounds is None:
            continue
        lo, hi = bounds
        for j, (x_hat, _) in enumerate(cell.gens):
            if rep.instances >= cap:
                return rep
            m_max = n
            for m in range(n + 1, fc.n_max + 1):
                if not diff_relation(fc, d, n, m - n, x_hat):
                    break
                m_max = m
            m_star = None
            for m_blk in range(n_blk + 1, n_blk + ctx.gfc.span + 1):
                if phi(m_blk + 1) <= m_max:
                    m_star = m_blk
                else:
                    break
            if m_star is None:
                continue
            rep.instances += 1
            dim_d, dim_t = fc.dim(d), fc.dim(d - 1)
            bnd = fc.boundary(d)
            w_idx = [j2 for j2 in fc.indices_at_least(d, n + 1) if fc.basis_levels(d)[j2] < hi]
            c_idx = fc.indices_at_least(d, hi)
            u_idx = fc.indices_at_least(d, phi(m_star))
            r1 = [i for i, lev in enumerate(fc.basis_levels(d - 1)) if lo <= lev < hi]
            r2 = [i for i, lev in enumerate(fc.basis_levels(d - 1)) if lev < phi(m_star + 1)]
            dx = fc.boundary_map(d, x_hat)
            rhs = [-dx[i] for i in r1] + [-dx[i] for i in r2]
            columns = []
            for j2 in w_idx:
                columns.append([bnd[i][j2] for i in r1] + [bnd[i][j2] for i in r2])
            for j2 in c_idx:
                columns.append([0] * len(r1) + [bnd[i][j2] for i in r2])
            for j2 in u_idx:
                columns.append([0] * len(r1) + [bnd[i][j2] for i in r2])
            rep.checks += 1
            if not _solvable(columns, rhs, prime):
                rep.failures.append(
                    f"null_b at {(n, d)} gen {j}: no gathered (M - N)-cycle "
                    f"extension for block {m_star}"
                )
    return rep


def transfer_check(
    fc: FilteredComplex, phi: GatherMap, theorem: str, max_instances: int = 60
) -> TransferReport:
    """Check one transfer statement on a concrete filtered complex.

    theorem:
      * ``"short"`` -- differentials inside one phi-block hold in the full
        filtration iff they hold in the block's truncation;
      * ``"long"``  -- a differential crossing blocks leaves surviving classes
        in the two block truncations and a differential of the gathered
        sequence between them;
      * ``"back"``  -- every nonzero gathered differential comes from an
        honest differential at some level of the source block;
      * ``"null_a"`` -- gathered cycles kill the original differentials on
        every block-level representative, with a strict upper endpoint;
      * ``"null_b"`` -- original classes killing enough differentials give
        gathered cycles.

    Returns a :class:`TransferReport`; ``report.passed`` is the verdict.
    """
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem!r}")
    ctx = _TransferContext(fc, phi)
    checker = {
        "short": _check_short,
        "long": _check_long,
        "back": _check_back,
        "null_a": _check_null_a,
        "null_b": _check_null_b,
    }[theorem]
    return checker(ctx, max_instances)


# ---------------------------------------------------------------------------
# Fixtures and randomized inputs.
# ---------------------------------------------------------------------------


def counterexample_fixture() -> tuple[FilteredComplex, GatherMap]:
    """The minimal example showing a gathered differential is not computable
    from the deepest-level representative of its source class.

    Degree-1 chains x' (level 1) and x - x' (level 0) with dx' = y at level 2
    and d(x - x') = 0.  Gathering levels {0, 1} into one block makes
    x = x' + (x - x') a gathered class supporting d^1(x) = y, yet its deepest
    representative x - x' has vanishing differentials on every page of the
    original filtration: the differential lives on the level-1 lift x'.
    """
    names = {0: ["y"], 1: ["x'", "x-x'"]}
    levels = {0: [2], 1: [1, 0]}
    boundaries = {1: [[1, 0]]}
    fc = FilteredComplex(3, names, levels, boundaries, (0, 3))
    phi = GatherMap({0: 0, 1: 2, 2: 3})
    return fc, phi


def random_gather_map(rng: random.Random, n_min: int, n_max: int) -> GatherMap:
    """A random monotone level-regrouping with anchors inside [n_min, n_max]."""
    span = n_max - n_min
    blocks = rng.randint(1, max(1, min(3, span)))
    cuts = sorted(rng.sample(range(n_min + 1, n_max), blocks - 1)) if blocks > 1 else []
    values = [n_min] + cuts + [n_max + rng.randint(0, 1)]
    table = {i: v for i, v in enumerate(values)}
    return GatherMap(table)


def random_filtered_complex(
    seed: int = 0,
    max_degree: int = 4,
    max_levels: int = 5,
    max_rank: int = 3,
    ring: str | None = None,
    prime: int | None = None,
) -> FilteredComplex:
    """A small random filtered complex with known-by-construction structure.

    The boundary is a two-term matching (each basis element belongs to at
    most one pair, targets at least as deep as sources) conjugated by random
    level-respecting unimodular shears, so d^2 = 0 holds exactly while the
    matrices look generic.
    """
    rng = random.Random(seed)
    if prime is None:
        prime = rng.choice([2, 3, 5])
    if ring is None:
        ring = rng.choice(["Zp", "Fp"])
    span = rng.randint(2, max_levels)
    n_deg = rng.randint(2, max_degree)
    dims = {d: rng.randint(0, max_rank) for d in range(n_deg)}
    while sum(dims.values()) < 2:
        dims[rng.randrange(n_deg)] += 1
    levels = {d: [rng.randrange(span) for _ in range(dims[d])] for d in range(n_deg)}
    names = {d: [f"e{d}.{i}" for i in range(dims[d])] for d in range(n_deg)}
    bnd = {d: [[0] * dims[d] for _ in range(dims.get(d - 1, 0))] for d in range(n_deg)}
    used: set[tuple[int, int]] = set()
    for d in range(n_deg - 1, 0, -1):
        for j in range(dims[d]):
            if (d, j) in used or rng.random() > 0.6:
                continue
            cands = [
                i
                for i in range(dims[d - 1])
                if (d - 1, i) not in used and levels[d - 1][i] >= levels[d][j]
            ]
            if not cands:
                continue
            i = rng.choice(cands)
            bnd[d][i][j] = rng.choice([1, -1, 2, prime, -prime, prime * prime])
            used.add((d, j))
            used.add((d - 1, i))
    shear = {d: identity_matrix(dims[d]) for d in range(n_deg)}
    shear_inv = {d: identity_matrix(dims[d]) for d in range(n_deg)}
    for d in range(n_deg):
        k = dims[d]
        if k < 2:
            continue
        for _ in range(rng.randint(k, 2 * k)):
            i, j = rng.sample(range(k), 2)
            if levels[d][j] < levels[d][i]:
                i, j = j, i
            lam = rng.choice([1, -1, 2, -2])
            for row in shear[d]:
                row[i] += lam * row[j]
            shear_inv[d][j] = [
                a - lam * b for a, b in zip(shear_inv[d][j], shear_inv[d][i])
            ]
    sheared = {}
    for d in range(n_deg):
        if dims.get(d - 1, 0) and dims[d]:
            sheared[d] = mat_mul(shear_inv[d - 1], mat_mul(bnd[d], shear[d]))
        else:
            sheared[d] = bnd[d]
    return FilteredComplex(prime, names, levels, sheared, (0, span), ring)
