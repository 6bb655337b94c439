"""Exact arithmetic for finitely generated abelian groups localized at 2.

Groups are stored as lists of cyclic orders: ``0`` is an infinite cyclic
summand Z(2) (the 2-local integers), any other order must be a power of
two >= 2.  All computations (Smith normal form, kernels, cokernels,
presentation quotients, extension resolution) are done over the plain
integers; odd torsion produced by a presentation is invisible 2-locally
and is stripped from the invariant factors.

Everything here is immutable after construction and side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, prod
from typing import Optional, Sequence


class GroupError(ValueError):
    pass


class ExtensionUnresolved(GroupError):
    """Raised when an extension problem lacks a matching lift certificate."""


def strip_odd(n: int) -> int:
    """Reduce an integer to its sign times its 2-part.

    Odd integers act invertibly 2-locally, so the cyclic subgroup
    generated by ``n * x`` equals the one generated by ``2^v2(n) * x``.

    >>> strip_odd(6)
    2
    >>> strip_odd(-24)
    -8
    >>> strip_odd(0)
    0
    >>> strip_odd(7)
    1
    """
    if n == 0:
        return 0
    sign = 1 if n > 0 else -1
    n = abs(n)
    return sign * (n & -n)


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


# ---------------------------------------------------------------------------
# integer matrices
# ---------------------------------------------------------------------------

class IntMat:
    """A dense integer matrix that knows its shape even when empty."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence[int]], ncols: Optional[int] = None):
        self.rows = [list(map(int, r)) for r in rows]
        self.nrows = len(self.rows)
        if self.nrows:
            self.ncols = len(self.rows[0])
            if any(len(r) != self.ncols for r in self.rows):
                raise GroupError("ragged matrix")
            if ncols is not None and ncols != self.ncols:
                raise GroupError("ncols mismatch")
        else:
            if ncols is None:
                raise GroupError("empty matrix needs an explicit column count")
            self.ncols = ncols

    @classmethod
    def identity(cls, n: int) -> "IntMat":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "IntMat":
        return cls([[0] * ncols for _ in range(nrows)], ncols)

    def copy(self) -> "IntMat":
        return IntMat([r[:] for r in self.rows], self.ncols)

    def transpose(self) -> "IntMat":
        return IntMat([[self.rows[i][j] for i in range(self.nrows)]
                       for j in range(self.ncols)], self.nrows)

    def __matmul__(self, other: "IntMat") -> "IntMat":
        if self.ncols != other.nrows:
            raise GroupError("shape mismatch in product")
        out = []
        for i in range(self.nrows):
            ri = self.rows[i]
            out.append([sum(ri[k] * other.rows[k][j] for k in range(self.ncols))
                        for j in range(other.ncols)])
        return IntMat(out, other.ncols)

    def col(self, j: int) -> list:
        return [self.rows[i][j] for i in range(self.nrows)]

    def __eq__(self, other):
        return (isinstance(other, IntMat) and self.ncols == other.ncols
                and self.rows == other.rows)

    def __repr__(self):
        return f"IntMat({self.rows!r}, ncols={self.ncols})"

    def det(self) -> int:
        """Exact determinant by fraction-free (Bareiss) elimination."""
        if self.nrows != self.ncols:
            raise GroupError("determinant of a non-square matrix")
        n = self.nrows
        if n == 0:
            return 1
        a = [r[:] for r in self.rows]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SnfResult:
    """U @ m @ V == D with U, V unimodular and D a divisibility chain."""
    u: IntMat
    d: IntMat
    v: IntMat


def _pivot(a, t, nrows, ncols):
    """Smallest nonzero |entry| in a[t:,t:]; ties by lowest row, then column."""
    best = None
    for i in range(t, nrows):
        for j in range(t, ncols):
            e = a[i][j]
            if e != 0 and (best is None or abs(e) < abs(a[best[0]][best[1]])):
                best = (i, j)
    return best


def _snf_core(m: IntMat):
    """Diagonalize by unimodular row/column operations.

    Returns (u, d, v, uinv, vinv) with u@m@v == d, u@uinv == I, vinv@v == I.
    """
    nr, nc = m.nrows, m.ncols
    a = [r[:] for r in m.rows]
    u = IntMat.identity(nr).rows
    uinv = IntMat.identity(nr).rows
    v = IntMat.identity(nc).rows
    vinv = IntMat.identity(nc).rows

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]
        for r in uinv:
            r[i], r[j] = r[j], r[i]

    def row_add(i, j, q):
        # row_i += q * row_j
        for col in range(nc):
            a[i][col] += q * a[j][col]
        for col in range(nr):
            u[i][col] += q * u[j][col]
        for r in uinv:
            r[j] -= q * r[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]
        for r in uinv:
            r[i] = -r[i]

    def col_swap(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]
        vinv[i], vinv[j] = vinv[j], vinv[i]

    def col_add(i, j, q):
        # col_i += q * col_j
        for r in a:
            r[i] += q * r[j]
        for r in v:
            r[i] += q * r[j]
        for col in range(nc):
            vinv[j][col] -= q * vinv[i][col]

    t = 0
    limit = min(nr, nc)
    while t < limit:
        pos = _pivot(a, t, nr, nc)
        if pos is None:
            break
        i, j = pos
        if i != t:
            row_swap(t, i)
        if j != t:
            col_swap(t, j)
        if a[t][t] < 0:
            row_neg(t)
        # Clear the pivot row and column; restart the pivot hunt whenever a
        # division leaves a remainder (the remainder is strictly smaller).
        dirty = False
        for i in range(t + 1, nr):
            if a[i][t] != 0:
                q = a[i][t] // a[t][t]
                row_add(i, t, -q)
                if a[i][t] != 0:
                    dirty = True
        for j in range(t + 1, nc):
            if a[t][j] != 0:
                q = a[t][j] // a[t][t]
                col_add(j, t, -q)
                if a[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # The pivot must divide every remaining entry.
        offender = None
        p = a[t][t]
        for i in range(t + 1, nr):
            for j in range(t + 1, nc):
                if a[i][j] % p != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_add(t, offender, 1)
            continue
        t += 1

    return (IntMat(u, nr), IntMat(a, nc), IntMat(v, nc),
            IntMat(uinv, nr), IntMat(vinv, nc))


def smith_normal_form(m: IntMat) -> SnfResult:
    """Smith normal form with transforms: U @ m @ V == D.

    Total on integer matrices (including empty shapes) and deterministic
    for a fixed input.

    >>> r = smith_normal_form(IntMat([[2, 4], [6, 8]]))
    >>> [r.d.rows[i][i] for i in range(2)]
    [2, 4]
    """
    u, d, v, _, _ = _snf_core(m)
    return SnfResult(u, d, v)


def snf_diagonal(m: IntMat) -> list:
    d = _snf_core(m)[1]
    return [d.rows[i][i] for i in range(min(d.nrows, d.ncols))]


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

class TwoLocalGroup:
    """A finitely generated module over the 2-local integers.

    ``orders`` lists cyclic summands in canonical form: finite orders
    (powers of two) ascending, then zeros for the Z(2) summands.  Labels,
    when given, travel with their summands through canonicalization.

    >>> TwoLocalGroup([4, 2, 0]).render()
    'Z/2 + Z/4 + Z(2)'
    >>> TwoLocalGroup([2, 4]) == TwoLocalGroup([4, 2])
    True
    """

    __slots__ = ("orders", "labels")

    def __init__(self, orders: Sequence[int], labels: Optional[Sequence[str]] = None):
        orders = [int(o) for o in orders]
        for o in orders:
            if o != 0 and not _is_power_of_two(o):
                raise GroupError(f"order {o} is not 0 or a power of two >= 2")
        if labels is not None:
            labels = list(labels)
            if len(labels) != len(orders):
                raise GroupError("labels and orders differ in length")
        idx = sorted(range(len(orders)),
                     key=lambda i: (orders[i] == 0, orders[i], i))
        self.orders = tuple(orders[i] for i in idx)
        self.labels = tuple(labels[i] for i in idx) if labels is not None else None

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def free_rank(self) -> int:
        return sum(1 for o in self.orders if o == 0)

    def torsion_order(self) -> int:
        return prod(o for o in self.orders if o != 0) if self.orders else 1

    def is_trivial(self) -> bool:
        return not self.orders

    def is_torsion_free(self) -> bool:
        return all(o == 0 for o in self.orders)

    def exponent(self) -> int:
        """Smallest e killing the torsion part (1 if torsion free)."""
        return max((o for o in self.orders if o != 0), default=1)

    def label(self, i: int) -> str:
        if self.labels is not None:
            return self.labels[i]
        return f"g{i}"

    def generator_index(self, label: str) -> int:
        if self.labels is None:
            raise GroupError("group has no labels")
        return self.labels.index(label)

    def with_labels(self, labels: Sequence[str]) -> "TwoLocalGroup":
        if len(labels) != len(self.orders):
            raise GroupError("labels and orders differ in length")
        g = TwoLocalGroup.__new__(TwoLocalGroup)
        g.orders = self.orders
        g.labels = tuple(labels)
        return g

    def reduce_vector(self, vec: Sequence[int]) -> tuple:
        """Reduce coordinates modulo the summand orders."""
        if len(vec) != self.rank:
            raise GroupError("vector length does not match rank")
        return tuple(x % o if o else x for x, o in zip(vec, self.orders))

    def vector(self, coeffs: dict) -> tuple:
        """Coordinate vector from a {label: coefficient} mapping.

        Construction sorts summands canonically, so addressing them by
        label is the safe way to build coordinate vectors.
        """
        vec = [0] * self.rank
        for label, c in coeffs.items():
            vec[self.generator_index(label)] = c
        return self.reduce_vector(vec)

    def element_order(self, vec: Sequence[int]) -> int:
        """Order of the element with these coordinates (0 = infinite)."""
        vec = self.reduce_vector(vec)
        n = 1
        for x, o in zip(vec, self.orders):
            if x == 0:
                continue
            if o == 0:
                return 0
            n = max(n, o // gcd(o, x))
        return n

    def elements(self):
        """Iterate all coordinate vectors (finite groups only)."""
        if self.free_rank:
            raise GroupError("cannot enumerate an infinite group")
        vec = [0] * self.rank
        while True:
            yield tuple(vec)
            i = 0
            while i < self.rank:
                vec[i] += 1
                if vec[i] < self.orders[i]:
                    break
                vec[i] = 0
                i += 1
            else:
                return

    def render(self) -> str:
        """Canonical textual form, e.g. ``'Z/2 + Z/4 + Z(2)'``."""
        if not self.orders:
            return "0"
        return " + ".join("Z(2)" if o == 0 else f"Z/{o}" for o in self.orders)

    def describe(self) -> str:
        """Rendering with generator labels attached."""
        if not self.orders:
            return "0"
        parts = []
        for i, o in enumerate(self.orders):
            head = "Z(2)" if o == 0 else f"Z/{o}"
            parts.append(f"{head}{{{self.label(i)}}}")
        return " + ".join(parts)

    def __eq__(self, other):
        return isinstance(other, TwoLocalGroup) and self.orders == other.orders

    def __hash__(self):
        return hash(self.orders)

    def __repr__(self):
        return f"TwoLocalGroup({list(self.orders)!r})"


TRIVIAL = TwoLocalGroup([])


def group_equal(a: TwoLocalGroup, b: TwoLocalGroup) -> bool:
    """Equality of canonical forms (labels are ignored).

    >>> group_equal(TwoLocalGroup([2, 4]), TwoLocalGroup([4, 2]))
    True
    >>> group_equal(TwoLocalGroup([4]), TwoLocalGroup([2, 2]))
    False
    """
    return a.orders == b.orders


def direct_sum(*groups: TwoLocalGroup) -> TwoLocalGroup:
    orders = []
    labels = []
    labelled = bool(groups) and all(g.labels is not None for g in groups)
    for g in groups:
        orders.extend(g.orders)
        if labelled:
            labels.extend(g.labels)
    return TwoLocalGroup(orders, labels if labelled else None)


class GroupHom:
    """A homomorphism stored as an integer matrix over the chosen bases.

    Rows are indexed by target generators, columns by source generators.
    A column for a source generator of finite order d must be killed by d
    in the target; this is checked at construction.
    """

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source: TwoLocalGroup, target: TwoLocalGroup, matrix: IntMat,
                 check: bool = True):
        if matrix.nrows != target.rank or matrix.ncols != source.rank:
            raise GroupError("matrix shape does not match source/target ranks")
        rows = []
        for i in range(matrix.nrows):
            o = target.orders[i]
            rows.append([x % o if o else x for x in matrix.rows[i]])
        self.matrix = IntMat(rows, matrix.ncols)
        self.source = source
        self.target = target
        if check:
            self._check_compatible()

    def _check_compatible(self):
        for j in range(self.source.rank):
            d = self.source.orders[j]
            if d == 0:
                continue
            for i in range(self.target.rank):
                o = self.target.orders[i]
                x = self.matrix.rows[i][j] * d
                if (o == 0 and x != 0) or (o != 0 and x % o != 0):
                    raise GroupError(
                        f"incompatible hom: column {j} ({self.source.label(j)}) "
                        f"of order {d} is not annihilated in the target")

    @classmethod
    def zero(cls, source: TwoLocalGroup, target: TwoLocalGroup) -> "GroupHom":
        return cls(source, target, IntMat.zero(target.rank, source.rank))

    @classmethod
    def identity(cls, g: TwoLocalGroup) -> "GroupHom":
        return cls(g, g, IntMat.identity(g.rank))

    def apply(self, vec: Sequence[int]) -> tuple:
        if len(vec) != self.source.rank:
            raise GroupError("vector length does not match source rank")
        out = [sum(self.matrix.rows[i][j] * vec[j] for j in range(self.source.rank))
               for i in range(self.target.rank)]
        return self.target.reduce_vector(out)

    def compose(self, inner: "GroupHom") -> "GroupHom":
        """self after inner (source of self must equal target of inner)."""
        if inner.target.orders != self.source.orders:
            raise GroupError("composition mismatch")
        return GroupHom(inner.source, self.target, self.matrix @ inner.matrix,
                        check=False)

    def is_zero(self) -> bool:
        return all(all(x == 0 for x in r) for r in self.matrix.rows)

    def is_surjective(self) -> bool:
        g, _ = cokernel(self)
        return g.is_trivial()

    def __repr__(self):
        return f"GroupHom({self.source!r} -> {self.target!r}, {self.matrix.rows!r})"


# ---------------------------------------------------------------------------
# presentation machinery
# ---------------------------------------------------------------------------

def group_from_presentation(n: int, relation_rows: Sequence[Sequence[int]]):
    """Quotient of Z^n by the row lattice of ``relation_rows``, 2-localized.

    Returns (group, proj, sect): ``proj`` (rank x n) maps old coordinates
    to canonical quotient coordinates, ``sect`` (n x rank) lifts canonical
    generators; proj @ sect == identity exactly.  Odd parts of invariant
    factors are units 2-locally and are dropped.
    """
    rel = IntMat(list(relation_rows), n)
    _, d, v, _, vinv = _snf_core(rel)
    # y = V^T x diagonalizes the relation lattice: x in L  iff  d_i | y_i.
    vt = v.transpose()
    diag = [d.rows[i][i] for i in range(min(d.nrows, d.ncols))]
    orders = []
    proj_rows = []
    sect_rows = []  # row i of vinv lifts the generator with coordinate y_i
    for i in range(n):
        di = diag[i] if i < len(diag) else 0
        o = abs(strip_odd(di)) if di else 0
        if o == 1:
            continue  # odd-order summand, trivial 2-locally
        orders.append(o)
        proj_rows.append(vt.rows[i])
        sect_rows.append(vinv.rows[i])
    group = TwoLocalGroup(orders)
    idx = sorted(range(len(orders)), key=lambda i: (orders[i] == 0, orders[i], i))
    proj_rows = [proj_rows[i] for i in idx]
    sect_rows = [sect_rows[i] for i in idx]
    reduced = []
    for i in range(group.rank):
        o = group.orders[i]
        reduced.append([x % o if o else x for x in proj_rows[i]])
    proj = IntMat(reduced, n)
    sect = IntMat([[sect_rows[j][i] for j in range(group.rank)]
                   for i in range(n)], group.rank)
    return group, proj, sect


def presentation_rows(g: TwoLocalGroup) -> list:
    rows = []
    for i, o in enumerate(g.orders):
        if o:
            row = [0] * g.rank
            row[i] = o
            rows.append(row)
    return rows


def cokernel(h: GroupHom):
    """Quotient of the target by the image, with the projection hom.

    >>> zz = TwoLocalGroup([0])
    >>> g, p = cokernel(GroupHom(zz, zz, IntMat([[8]])))
    >>> g.render()
    'Z/8'
    """
    h._check_compatible()
    n = h.target.rank
    rows = presentation_rows(h.target)
    for j in range(h.source.rank):
        rows.append(h.matrix.col(j))
    group, proj, _ = group_from_presentation(n, rows)
    return group, GroupHom(h.target, group, proj, check=False)


def kernel(h: GroupHom):
    """Subgroup of the source mapping to zero, with its inclusion hom."""
    h._check_compatible()
    ns, nt = h.source.rank, h.target.rank
    # Solve M x + T y = 0 where T carries the finite target orders.
    finite_t = [i for i in range(nt) if h.target.orders[i] != 0]
    ncols = ns + len(finite_t)
    rows = []
    for i in range(nt):
        row = list(h.matrix.rows[i])
        for ti in finite_t:
            row.append(h.target.orders[ti] if ti == i else 0)
        rows.append(row)
    sys = IntMat(rows, ncols) if rows else IntMat([], ncols)
    _, d, v, _, _ = _snf_core(sys)
    srank = sum(1 for i in range(min(d.nrows, d.ncols)) if d.rows[i][i] != 0)
    # Solution lattice of the system = span of the last ncols-srank columns
    # of V; its x-parts generate the preimage lattice K'.
    gens = [[v.rows[i][j] for j in range(srank, ncols)] for i in range(ns)]
    bred = _column_basis(IntMat(gens, ncols - srank))
    k = bred.ncols
    # Relations: source order vectors written in the K' basis.
    rel_rows = []
    for i, o in enumerate(h.source.orders):
        if not o:
            continue
        target_vec = [o if i == r else 0 for r in range(ns)]
        rel_rows.append(_solve_in_lattice(bred, target_vec))
    group, _, sect = group_from_presentation(k, rel_rows)
    incl_src = bred @ sect
    reduced = []
    for i in range(ns):
        o = h.source.orders[i]
        reduced.append([x % o if o else x for x in incl_src.rows[i]])
    return group, GroupHom(group, h.source, IntMat(reduced, group.rank), check=False)


def _column_basis(m: IntMat) -> IntMat:
    """A basis (as columns) for the lattice spanned by the columns of m."""
    if m.ncols == 0:
        return m
    _, d, _, uinv, _ = _snf_core(m)
    # m = Uinv D Vinv, so the column span equals the span of Uinv D.
    cols = []
    for j in range(min(d.nrows, d.ncols)):
        dj = d.rows[j][j]
        if dj == 0:
            continue
        cols.append([uinv.rows[i][j] * dj for i in range(m.nrows)])
    return IntMat([[c[i] for c in cols] for i in range(m.nrows)], len(cols))


def _solve_in_lattice(basis: IntMat, vec: Sequence[int]) -> list:
    """Coordinates of vec in the lattice spanned by the basis columns."""
    u, d, v, _, _ = _snf_core(basis)  # u @ basis @ v == d
    w = [sum(u.rows[i][kk] * vec[kk] for kk in range(len(vec)))
         for i in range(basis.nrows)]
    z = []
    for j in range(basis.ncols):
        dj = d.rows[j][j] if j < min(d.nrows, d.ncols) else 0
        if dj == 0:
            if w[j] != 0:
                raise GroupError("vector not in lattice")
            z.append(0)
        else:
            if w[j] % dj != 0:
                raise GroupError("vector not in lattice")
            z.append(w[j] // dj)
    for j in range(basis.ncols, basis.nrows):
        if w[j] != 0:
            raise GroupError("vector not in lattice")
    return [sum(v.rows[i][j] * z[j] for j in range(basis.ncols))
            for i in range(basis.ncols)]


def quotient_by_elements(g: TwoLocalGroup, rels: Sequence[Sequence[int]]):
    """Quotient of g by the subgroup generated by the given coordinate vectors.

    Each vector's integer content is stripped of its odd part first (an odd
    unit times a generator spans the same 2-local cyclic subgroup).
    Returns (group, projection hom).

    >>> g = TwoLocalGroup([0, 2, 2], ["b", "x", "y"])
    >>> q, _ = quotient_by_elements(g, [g.vector({"b": 24})])
    >>> q.render()
    'Z/2 + Z/2 + Z/8'
    """
    rows = presentation_rows(g)
    for v in rels:
        if len(v) != g.rank:
            raise GroupError("relation length does not match rank")
        content = 0
        for x in v:
            content = gcd(content, x)
        if content > 1:
            two = abs(strip_odd(content))
            v = [x // content * two for x in v]
        rows.append(list(v))
    group, proj, _ = group_from_presentation(g.rank, rows)
    return group, GroupHom(g, group, proj, check=False)


@dataclass(frozen=True)
class LiftCertificate:
    """Witness that a quotient generator lifts with a known order.

    ``relation`` (optional) gives the sub element equal to
    (quot order) * lift as coordinates in the sub; a nonzero relation
    means the extension is not split along this generator.
    """
    quot_index: int
    lift_order: int
    lift_label: str = ""
    relation: Optional[tuple] = None


@dataclass(frozen=True)
class ExtensionProblem:
    sub: TwoLocalGroup
    quot: TwoLocalGroup
    certificates: tuple

    def __post_init__(self):
        for c in self.certificates:
            if c.lift_order != 0 and not _is_power_of_two(c.lift_order):
                raise GroupError("lift order must be a power of two")
            qo = self.quot.orders[c.quot_index]
            if qo != 0 and c.lift_order != 0 and c.lift_order < qo:
                raise GroupError("lift order smaller than the quotient order")


def solve_extension(p: ExtensionProblem) -> TwoLocalGroup:
    """Resolve 0 -> sub -> E -> quot -> 0 using order-matching certificates.

    Splits (returns sub + quot) only when every quotient generator carries
    a certificate whose lift order equals the generator's order.  Anything
    else raises ExtensionUnresolved naming the offending generators: the
    solver never guesses a middle group.
    """
    if p.quot.is_trivial():
        return p.sub
    by_index = {c.quot_index: c for c in p.certificates}
    missing = []
    for i, o in enumerate(p.quot.orders):
        c = by_index.get(i)
        if c is None or c.lift_order != o or (c.relation and any(c.relation)):
            missing.append(p.quot.label(i))
    if missing:
        raise ExtensionUnresolved(
            "extension unresolved: no order-matching lift certificate for "
            + ", ".join(missing))
    labels = None
    if p.sub.labels is not None:
        labels = list(p.sub.labels) + [
            by_index[i].lift_label or f"lift({p.quot.label(i)})"
            for i in range(p.quot.rank)]
    return TwoLocalGroup(list(p.sub.orders) + list(p.quot.orders), labels)


def extension_with_relations(p: ExtensionProblem):
    """Resolve an extension whose certificates carry explicit relations.

    The middle group is presented by the sub generators plus one new
    generator per quotient summand, with (quot order) * lift = relation.
    Returns (group, chart): chart maps (sub coords ++ lift coords) to the
    middle group's canonical coordinates.  Each certificate's claimed lift
    order is verified against the presented group.
    """
    ns = p.sub.rank
    by_index = {c.quot_index: c for c in p.certificates}
    for i in range(p.quot.rank):
        if i not in by_index:
            raise ExtensionUnresolved(
                f"extension unresolved: no certificate for {p.quot.label(i)}")
    n = ns + p.quot.rank
    rows = [row + [0] * p.quot.rank for row in presentation_rows(p.sub)]
    for i in range(p.quot.rank):
        c = by_index[i]
        qo = p.quot.orders[i]
        rel = list(c.relation) if c.relation else [0] * ns
        if len(rel) != ns:
            raise GroupError("certificate relation length mismatch")
        row = [-x for x in rel] + [0] * p.quot.rank
        row[ns + i] = qo
        rows.append(row)
    group, proj, _ = group_from_presentation(n, rows)
    for i in range(p.quot.rank):
        c = by_index[i]
        lift_vec = proj.col(ns + i)
        got = group.element_order(lift_vec)
        if got != c.lift_order:
            raise GroupError(
                f"certificate for {p.quot.label(i)} claims lift order "
                f"{c.lift_order} but the presentation gives {got}")
    return group, proj
