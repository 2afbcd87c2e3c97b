"""Exact integer linear algebra for finitely generated abelian groups.

Everything in this package ultimately reduces to Smith normal form over Z,
saturated kernels, canonical solutions of linear systems, and subquotients
``span(numerators) / span(denominators)`` of integer lattices.  This module
implements those primitives on plain ``list[list[int]]`` matrices with
arbitrary-precision integers, so no floating point or external linear algebra
is involved anywhere.

Matrices act on column vectors: ``A`` with ``m`` rows and ``n`` columns maps
``Z^n -> Z^m``.  Vectors are plain lists of ints.

References: Cohen, "A Course in Computational Algebraic Number Theory",
ch. 2.4 (Hermite and Smith normal forms).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, inf


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: return ``(g, x, y)`` with ``g = a*x + b*y`` and ``g >= 0``.

    >>> xgcd(12, 18)
    (6, -1, 1)
    >>> xgcd(0, 0)
    (0, 1, 0)
    >>> g, x, y = xgcd(240, -46)
    >>> g, 240 * x + -46 * y
    (2, 2)
    """
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def valuation(n: int, p: int):
    """p-adic valuation of an integer, with ``valuation(0, p) == inf``.

    >>> valuation(45, 3)
    2
    >>> valuation(7, 3)
    0
    >>> valuation(0, 5)
    inf
    """
    if n == 0:
        return inf
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def identity_matrix(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    """Matrix product, tolerant of empty factors."""
    if not a:
        return []
    inner = len(a[0])
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        new = [0] * cols
        for k in range(inner):
            x = row[k]
            if x:
                brow = b[k]
                for j in range(cols):
                    if brow[j]:
                        new[j] += x * brow[j]
        out.append(new)
    return out


def mat_vec(a: list[list[int]], v: list[int]) -> list[int]:
    out = []
    for row in a:
        s = 0
        for x, y in zip(row, v):
            if x and y:
                s += x * y
        out.append(s)
    return out


@dataclass
class SmithDecomposition:
    """Result of ``smith_normal_form``: ``S * A * T`` is diagonal.

    ``diag`` holds the diagonal entries (non-negative, each dividing the
    next).  ``S`` is ``m x m``, ``T`` and ``Tinv`` are ``n x n``; all are
    unimodular, and ``Tinv`` is the inverse of ``T``.  When constructed with
    ``with_transforms=False`` the transform fields are ``None``.
    """

    diag: list[int]
    nrows: int
    ncols: int
    S: list[list[int]] | None = None
    T: list[list[int]] | None = None
    Tinv: list[list[int]] | None = None

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d != 0)

    def diagonal_entry(self, j: int) -> int:
        """Diagonal entry for column ``j``, zero beyond ``min(m, n)``."""
        return self.diag[j] if j < len(self.diag) else 0


def smith_normal_form(a: list[list[int]], with_transforms: bool = True) -> SmithDecomposition:
    """Smith normal form of an integer matrix.

    Returns a :class:`SmithDecomposition` with ``S * a * T`` diagonal, the
    diagonal entries non-negative and forming a divisibility chain.

    >>> snf = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, 4, 16]])
    >>> snf.diag
    [2, 2, 156]
    >>> from_transforms = mat_mul(mat_mul(snf.S, [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]), snf.T)
    >>> [from_transforms[i][i] for i in range(3)]
    [2, 2, 156]
    >>> smith_normal_form([[0]]).diag
    [0]
    """
    m = len(a)
    n = len(a[0]) if a else 0
    A = [list(row) for row in a]
    track = with_transforms
    S = identity_matrix(m) if track else None
    T = identity_matrix(n) if track else None
    Tinv = identity_matrix(n) if track else None

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        if track:
            S[i], S[j] = S[j], S[i]

    def row_add(i, j, c):
        # row_i += c * row_j
        ai, aj = A[i], A[j]
        for k in range(n):
            if aj[k]:
                ai[k] += c * aj[k]
        if track:
            si, sj = S[i], S[j]
            for k in range(m):
                if sj[k]:
                    si[k] += c * sj[k]

    def row_negate(i):
        A[i] = [-x for x in A[i]]
        if track:
            S[i] = [-x for x in S[i]]

    def col_swap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        if track:
            for row in T:
                row[i], row[j] = row[j], row[i]
            Tinv[i], Tinv[j] = Tinv[j], Tinv[i]

    def col_add(i, j, c):
        # col_i += c * col_j;  inverse op on Tinv rows: row_j -= c * row_i
        for row in A:
            if row[j]:
                row[i] += c * row[j]
        if track:
            for row in T:
                if row[j]:
                    row[i] += c * row[j]
            ti, tj = Tinv[i], Tinv[j]
            for k in range(n):
                if ti[k]:
                    tj[k] -= c * ti[k]

    def col_negate(i):
        for row in A:
            row[i] = -row[i]
        if track:
            for row in T:
                row[i] = -row[i]
            Tinv[i] = [-x for x in Tinv[i]]

    size = min(m, n)
    for t in range(size):
        # Find the smallest nonzero entry in the remaining block.
        pivot = None
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v:
                    if best is None or abs(v) < best:
                        best = abs(v)
                        pivot = (i, j)
                        if best == 1:
                            break
            if best == 1:
                break
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            row_swap(t, pi)
        if pj != t:
            col_swap(t, pj)
        while True:
            # Clear column t below the pivot.
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    if q:
                        row_add(i, t, -q)
                    if A[i][t]:
                        row_swap(t, i)
                        dirty = True
            # Clear row t to the right of the pivot.
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    if q:
                        col_add(j, t, -q)
                    if A[t][j]:
                        col_swap(t, j)
                        dirty = True
            if not dirty:
                # Pivot must divide every entry of the remaining block.
                offender = None
                piv = A[t][t]
                for i in range(t + 1, m):
                    row = A[i]
                    for j in range(t + 1, n):
                        if row[j] % piv:
                            offender = i
                            break
                    if offender is not None:
                        break
                if offender is None:
                    break
                row_add(t, offender, 1)
        if A[t][t] < 0:
            row_negate(t)

    diag = [A[j][j] for j in range(size)]
    return SmithDecomposition(diag=diag, nrows=m, ncols=n, S=S, T=T, Tinv=Tinv)


def invariant_factors(a: list[list[int]]) -> list[int]:
    """Nontrivial invariant factors (entries ``!= 1``; zeros omitted).

    >>> invariant_factors([[2, 0], [0, 3]])
    [6]
    >>> invariant_factors([[4, 0, 0], [0, 6, 0]])
    [2, 12]
    """
    snf = smith_normal_form(a, with_transforms=False)
    return [d for d in snf.diag if d not in (0, 1)]


def kernel_basis(a: list[list[int]]) -> list[list[int]]:
    """Basis of the (saturated) integer kernel ``{x : a @ x = 0}``.

    The basis vectors are returned as plain vectors in ``Z^n``.

    >>> kernel_basis([[1, 2, 3]])
    [[-2, 1, 0], [-3, 0, 1]]
    >>> kernel_basis([[2, 0], [0, 3]])
    []
    """
    n = len(a[0]) if a else 0
    if n == 0:
        return []
    if not a:
        return identity_matrix(n)
    snf = smith_normal_form(a)
    basis = []
    for j in range(n):
        if snf.diagonal_entry(j) == 0:
            basis.append([snf.T[i][j] for i in range(n)])
    return basis


def solve(a: list[list[int]], b: list[int], canonical: bool = True) -> list[int] | None:
    """One integer solution of ``a @ x = b``, or ``None`` if there is none.

    With ``canonical=True`` the solution is reduced modulo the kernel
    lattice to a canonical coset representative, making the output
    deterministic and independent of pivoting choices.

    >>> solve([[2, 0], [0, 3]], [4, 9])
    [2, 3]
    >>> solve([[2]], [3]) is None
    True
    >>> solve([[1, 1]], [5])
    [0, 5]
    """
    m = len(a)
    n = len(a[0]) if a else 0
    if m == 0:
        return [0] * n
    snf = smith_normal_form(a)
    sb = mat_vec(snf.S, b)
    y = [0] * n
    for i in range(m):
        d = snf.diagonal_entry(i) if i < n else 0
        if d == 0:
            if sb[i] != 0:
                return None
        else:
            if sb[i] % d:
                return None
            y[i] = sb[i] // d
    x = [sum(snf.T[i][j] * y[j] for j in range(n)) for i in range(n)]
    if canonical:
        ker = kernel_basis(a)
        if ker:
            x = Lattice(ker).reduce(x)
    return x


def kernel_mod(a: list[list[int]], modulus: int) -> list[list[int]]:
    """Basis of the lattice ``{x in Z^n : a @ x = 0 (mod modulus)}``.

    >>> sorted(kernel_mod([[1, 1]], 2))
    [[0, 2], [1, 1]]
    """
    m = len(a)
    n = len(a[0]) if a else 0
    if m == 0 or n == 0:
        return identity_matrix(n)
    aug = [list(row) + [modulus if i == k else 0 for k in range(m)] for i, row in enumerate(a)]
    lat = Lattice([])
    for vec in kernel_basis(aug):
        lat.add(vec[:n])
    return lat.basis()


class Lattice:
    """A sublattice of ``Z^n`` kept in row-echelon (Hermite-reduced) form.

    Supports incremental generation, canonical reduction of vectors modulo
    the lattice, and membership tests.

    >>> lat = Lattice([[2, 0, 1], [0, 3, 1]])
    >>> lat.contains([2, 3, 2])
    True
    >>> lat.contains([1, 0, 0])
    False
    >>> lat.reduce([5, 0, 2])
    [1, 0, 0]
    """

    def __init__(self, generators=()):
        self.rows: list[list[int]] = []
        self._pivots: list[int] = []  # pivot column of each row, increasing
        for g in generators:
            self.add(g)

    def __len__(self) -> int:
        return len(self.rows)

    def basis(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _first_nonzero(self, v: list[int]) -> int:
        for j, x in enumerate(v):
            if x:
                return j
        return -1

    def add(self, vec) -> bool:
        """Insert a vector; return True if the lattice grew."""
        v = list(vec)
        grew = False
        while True:
            j = self._first_nonzero(v)
            if j < 0:
                break
            # Find the echelon row with this pivot column, if any.
            idx = None
            for i, pj in enumerate(self._pivots):
                if pj == j:
                    idx = i
                    break
                if pj > j:
                    break
            if idx is None:
                if v[j] < 0:
                    v = [-x for x in v]
                pos = sum(1 for pj in self._pivots if pj < j)
                self.rows.insert(pos, v)
                self._pivots.insert(pos, j)
                grew = True
                self._normalize_above(pos)
                break
            row = self.rows[idx]
            g, s, t = xgcd(row[j], v[j])
            if g == abs(row[j]) and row[j] > 0:
                # Fast path: existing pivot divides incoming entry.
                q = v[j] // row[j]
                v = [x - q * y for x, y in zip(v, row)]
                continue
            new_row = [s * x + t * y for x, y in zip(row, v)]
            new_v = [(row[j] // g) * y - (v[j] // g) * x for x, y in zip(row, v)]
            self.rows[idx] = new_row
            v = new_v
            grew = True
            self._normalize_above(idx)
        return grew

    def _normalize_above(self, idx: int) -> None:
        # Reduce entries of earlier rows over this pivot (Hermite reduction).
        pj = self._pivots[idx]
        piv = self.rows[idx][pj]
        for i in range(idx):
            q = self.rows[i][pj] // piv
            if q:
                self.rows[i] = [x - q * y for x, y in zip(self.rows[i], self.rows[idx])]

    def reduce(self, vec) -> list[int]:
        """Canonical representative of ``vec`` modulo the lattice."""
        v = list(vec)
        for row, pj in zip(self.rows, self._pivots):
            q = v[pj] // row[pj]
            if q:
                v = [x - q * y for x, y in zip(v, row)]
        return v

    def contains(self, vec) -> bool:
        return all(x == 0 for x in self.reduce(vec))

    def contains_lattice(self, other: "Lattice") -> bool:
        return all(self.contains(r) for r in other.rows)


@dataclass
class GroupInvariants:
    """Invariants of a finitely generated ``Z_(p)``-module.

    ``free_rank`` copies of ``Z_(p)`` plus one ``Z/p^e`` per entry of
    ``exponents`` (sorted ascending).  With ``prime=None`` the ``exponents``
    field instead stores raw invariant factors.
    """

    free_rank: int
    exponents: tuple[int, ...]

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append(f"Z^{self.free_rank}" if self.free_rank > 1 else "Z")
        parts.extend(f"Z/p^{e}" if e > 1 else "Z/p" for e in self.exponents)
        return " + ".join(parts) if parts else "0"

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.exponents

    @property
    def torsion_length(self) -> int:
        return sum(self.exponents)

    def as_pair(self) -> tuple[int, tuple[int, ...]]:
        return (self.free_rank, self.exponents)


class QuotientLattice:
    """The subquotient ``(span(num) + span(den)) / span(den)`` of ``Z^dim``.

    Generators for numerator and denominator are arbitrary integer vectors;
    the denominator need not be contained in the numerator span (its span is
    added).  With a ``prime`` the group is read ``p``-locally: invariant
    factors contribute ``Z/p^v`` with ``v`` their p-adic valuation, and
    prime-to-p units are discarded.

    >>> q = QuotientLattice(2, [[1, 0], [0, 1]], [[2, 0], [0, 9]], prime=3)
    >>> q.invariants().as_pair()
    (0, (2,))
    >>> q.is_zero([0, 9]), q.is_zero([2, 0]), q.is_zero([0, 3])
    (True, True, False)
    >>> q.reduce([0, 9])
    [0, 0]
    """

    def __init__(self, dim: int, num, den, prime: int | None = None):
        self.dim = dim
        self.prime = prime
        ambient = Lattice([])
        for v in num:
            ambient.add(v)
        for v in den:
            ambient.add(v)
        self._span = ambient
        basis = ambient.basis()
        k = len(basis)
        self._basis = basis
        coords = [self._coords_in_basis(v) for v in den]
        if coords and k:
            snf = smith_normal_form(coords)
            self._T = snf.T
            self._Tinv = snf.Tinv
            self._orders = [snf.diagonal_entry(j) for j in range(k)]
        else:
            self._T = identity_matrix(k)
            self._Tinv = identity_matrix(k)
            self._orders = [0] * k

    def _coords_in_basis(self, vec) -> list[int]:
        v = list(vec)
        coords = [0] * len(self._basis)
        for i, row in enumerate(self._basis):
            pj = next(j for j, x in enumerate(row) if x)
            if v[pj] % row[pj]:
                raise ValueError("vector not in the numerator span")
            q = v[pj] // row[pj]
            coords[i] = q
            if q:
                v = [x - q * y for x, y in zip(v, row)]
        if any(v):
            raise ValueError("vector not in the numerator span")
        return coords

    def contains(self, vec) -> bool:
        """Is the vector in the numerator span at all?"""
        return self._span.contains(vec)

    def class_coords(self, vec) -> list[int]:
        """Coordinates of the class of ``vec`` in the diagonal generators."""
        x = self._coords_in_basis(vec)
        k = len(self._basis)
        y = [sum(x[i] * self._T[i][j] for i in range(k)) for j in range(k)]
        out = []
        for j in range(k):
            d = self._orders[j]
            if d == 0:
                out.append(y[j])
            elif self.prime is not None:
                e = valuation(d, self.prime)
                out.append(y[j] % (self.prime ** e) if e > 0 else 0)
            else:
                out.append(y[j] % d if d > 1 else 0)
        return out

    def reduce(self, vec) -> list[int]:
        """Canonical ambient representative of the class of ``vec``."""
        y = self.class_coords(vec)
        k = len(self._basis)
        x = [sum(y[j] * self._Tinv[j][i] for j in range(k)) for i in range(k)]
        out = [0] * self.dim
        for c, row in zip(x, self._basis):
            if c:
                out = [o + c * r for o, r in zip(out, row)]
        return out

    def is_zero(self, vec) -> bool:
        return all(c == 0 for c in self.class_coords(vec))

    def _nontrivial_indices(self) -> list[int]:
        """Diagonal coordinates with nontrivial (p-local) content, sorted with
        free coordinates first, then finite orders ascending."""
        keep = []
        for j, d in enumerate(self._orders):
            if d == 0:
                keep.append((0, 0, j))
            else:
                if self.prime is not None:
                    e = valuation(d, self.prime)
                    if e == 0:
                        continue
                    keep.append((1, self.prime**e, j))
                elif d != 1:
                    keep.append((1, d, j))
        keep.sort()
        return [j for _, _, j in keep]

    def generators(self) -> list[tuple[list[int], int]]:
        """Nontrivial generators as ``(ambient vector, order)`` pairs.

        Order 0 means infinite.  With a prime set, orders are p-powers and
        generators of prime-to-p order are dropped.  The order of the list
        matches :meth:`class_in_generators`.
        """
        gens = []
        for j in self._nontrivial_indices():
            d = self._orders[j]
            if self.prime is not None and d != 0:
                d = self.prime ** valuation(d, self.prime)
            vec = [0] * self.dim
            for i_basis, c in enumerate(self._Tinv[j]):
                if c:
                    vec = [o + c * r for o, r in zip(vec, self._basis[i_basis])]
            gens.append((vec, d))
        return gens

    def class_in_generators(self, vec) -> list[int]:
        """Coordinates of the class of ``vec`` on the ``generators()`` list."""
        y = self.class_coords(vec)
        return [y[j] for j in self._nontrivial_indices()]

    def invariants(self) -> GroupInvariants:
        free = sum(1 for d in self._orders if d == 0)
        if self.prime is None:
            tors = tuple(sorted(d for d in self._orders if d not in (0, 1)))
        else:
            tors = tuple(
                sorted(
                    v
                    for d in self._orders
                    if d != 0
                    for v in [valuation(d, self.prime)]
                    if v > 0
                )
            )
        return GroupInvariants(free, tors)


def clear_denominators(rows, prime: int) -> list[list[int]]:
    """Scale a matrix of ``Fraction``/int entries to integers.

    The scaling factor is the lcm of all denominators and must be coprime to
    ``prime`` (entries must be p-locally integral); a single global scalar is
    used so kernels are unchanged and images change by a p-local unit only.

    >>> clear_denominators([[Fraction(1, 2), 3]], prime=3)
    [[1, 6]]
    """
    scale = 1
    for row in rows:
        for x in row:
            if isinstance(x, Fraction):
                d = x.denominator
                scale = scale * d // gcd(scale, d)
    if scale % prime == 0:
        raise ValueError(f"matrix is not {prime}-locally integral")
    out = []
    for row in rows:
        new = []
        for x in row:
            y = x * scale
            if isinstance(y, Fraction):
                if y.denominator != 1:
                    raise AssertionError("denominator clearing failed")
                y = y.numerator
            new.append(int(y))
        out.append(new)
    return out
