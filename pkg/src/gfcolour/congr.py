"""Congruence of vertex subsets and the equality system of the gfc linear program.

Two finite planar point sets are congruent iff some bijection between them
preserves all pairwise distances, so everything here works on exact squared
distances.  Only independent subsets are classed: congruence preserves unit
distances, so a class is either wholly independent or wholly not, and the
non-independent classes give trivially satisfied constraints.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .field import Coeffs, MoserPoint, QuadValue, sq_dist, sq_dist_key
from .udgraph import UnitGraph, VertexSet, bits, enumerate_independent_sets, set_order_key


def _bijection_exists(dy: list[list], dz: list[list]) -> bool:
    """Backtracking search for a permutation p with dz[p[i]][p[j]] == dy[i][j]."""
    n = len(dy)
    if n != len(dz):
        return False
    if n <= 1:
        return True
    prof_y = [sorted(row[:i] + row[i + 1:]) for i, row in enumerate(dy)]
    prof_z = [sorted(row[:i] + row[i + 1:]) for i, row in enumerate(dz)]
    if sorted(prof_y) != sorted(prof_z):
        return False
    # anchor on the farthest pair, then visit points by decreasing distance to assigned ones
    far_i, far_j = max(((i, j) for i in range(n) for j in range(i + 1, n)),
                       key=lambda ij: dy[ij[0]][ij[1]])
    order = [far_i, far_j]
    rest = [k for k in range(n) if k not in order]
    order += rest
    cands = [[k for k in range(n) if prof_z[k] == prof_y[i]] for i in range(n)]
    image = [-1] * n
    used = [False] * n

    def extend(pos: int) -> bool:
        if pos == n:
            return True
        i = order[pos]
        for k in cands[i]:
            if used[k]:
                continue
            ok = True
            for prev in order[:pos]:
                if dz[k][image[prev]] != dy[i][prev]:
                    ok = False
                    break
            if ok:
                image[i] = k
                used[k] = True
                if extend(pos + 1):
                    return True
                used[k] = False
        image[i] = -1
        return False

    return extend(0)


def are_congruent(Y: Iterable[Coeffs], Z: Iterable[Coeffs]) -> bool:
    ys = [MoserPoint(*p) for p in Y]
    zs = [MoserPoint(*p) for p in Z]
    if len(ys) != len(zs):
        return False
    dy = [[sq_dist_key(p, q) for q in ys] for p in ys]
    dz = [[sq_dist_key(p, q) for q in zs] for p in zs]
    return _bijection_exists(dy, dz)


def congruence_key(points: Sequence[Coeffs]) -> tuple[int, tuple[QuadValue, ...]]:
    """Size plus sorted multiset of squared distances; equal for congruent sets."""
    pts = list(points)
    ds = sorted(sq_dist(pts[i], pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts)))
    return len(pts), tuple(ds)


class _DistanceTable:
    """Pairwise squared distances of a graph's vertices as small integer ids."""

    def __init__(self, G: UnitGraph) -> None:
        n = G.n
        keys = [[sq_dist_key(G.vertices[i], G.vertices[j]) for j in range(n)] for i in range(n)]
        # ids only need to be equal iff distances are; integer order is enough
        ids = {k: r for r, k in enumerate(sorted({k for row in keys for k in row}))}
        self.ids = [[ids[k] for k in row] for row in keys]

    def profile_key(self, idx: list[int]) -> tuple:
        d = self.ids
        profs = []
        for i in idx:
            row = d[i]
            profs.append(tuple(sorted(row[j] for j in idx if j != i)))
        profs.sort()
        return tuple(profs)

    def matrix(self, idx: list[int]) -> list[list[int]]:
        d = self.ids
        return [[d[i][j] for j in idx] for i in idx]


def congruence_classes(subsets: Sequence[VertexSet], G: UnitGraph) -> list[list[VertexSet]]:
    """Partition ``subsets`` into congruence classes.

    Buckets by a distance-profile key (a congruence invariant), then refines
    each bucket by explicit bijection search.  Members of a class are in
    (size, lexicographic) order; classes are ordered by their least member.
    """
    table = _DistanceTable(G)
    buckets: dict[tuple, list[VertexSet]] = defaultdict(list)
    for s in subsets:
        buckets[table.profile_key(bits(s))].append(s)

    classes: list[list[VertexSet]] = []
    for members in buckets.values():
        if len(members) == 1:
            classes.append(members)
            continue
        members.sort(key=set_order_key)
        local: list[tuple[list[list[int]], list[VertexSet]]] = []
        for s in members:
            m = table.matrix(bits(s))
            for rep_matrix, cls in local:
                if _bijection_exists(rep_matrix, m):
                    cls.append(s)
                    break
            else:
                local.append((m, [s]))
        classes.extend(cls for _, cls in local)
    for cls in classes:
        cls.sort(key=set_order_key)
        _check_edge_consistency(cls, G)
    classes.sort(key=lambda c: set_order_key(c[0]))
    return classes


def _check_edge_consistency(cls: list[VertexSet], G: UnitGraph) -> None:
    # congruent sets have the same number of internal unit-distance pairs
    counts = {sum((G.nbr[i] & s).bit_count() for i in bits(s)) for s in cls}
    if len(counts) > 1:
        raise AssertionError("congruence class mixes sets with different edge counts")


def spanning_pairs(classes: Sequence[Sequence[VertexSet]],
                   reverse: bool = False) -> list[tuple[VertexSet, VertexSet]]:
    """(representative, member) pairs; the representative is the least member.

    ``reverse=True`` picks the greatest member instead (the pair count does
    not depend on the choice).
    """
    pairs = []
    for cls in classes:
        ordered = sorted(cls, key=set_order_key, reverse=reverse)
        rep = ordered[0]
        pairs.extend((rep, other) for other in ordered[1:])
    return pairs


@dataclass
class ConstraintSystem:
    """The vector e and sparse rows of C over independent-set columns.

    Row r has +1 on columns whose set contains Y but not Y', -1 on columns
    containing Y' but not Y.
    """

    n_vertices: int
    columns: list[VertexSet]
    e: np.ndarray  # column indices where e_j = 1
    pairs: list[tuple[VertexSet, VertexSet]]
    plus: list[np.ndarray] = field(repr=False)
    minus: list[np.ndarray] = field(repr=False)
    include_empty: bool = False

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.pairs)

    def e_dense(self) -> np.ndarray:
        v = np.zeros(self.n_cols, dtype=np.int64)
        v[self.e] = 1
        return v

    def matrix(self, with_e: bool = False):
        """C as a scipy CSR matrix of shape (n_rows, n_cols).

        With ``with_e`` the row e is stacked on top.  Built in one pass with
        32-bit indices; the 27-vertex system does not survive extra copies.
        """
        from scipy.sparse import csr_matrix

        rows = list(zip(self.plus, self.minus))
        if with_e:
            rows.insert(0, (self.e, np.zeros(0, dtype=np.int32)))
        lengths = np.array([len(p) + len(m) for p, m in rows], dtype=np.int64)
        nnz = int(lengths.sum())
        itype = np.int32 if nnz < 2**31 else np.int64
        indptr = np.zeros(len(rows) + 1, dtype=itype)
        np.cumsum(lengths, out=indptr[1:])
        indices = np.empty(nnz, dtype=itype)
        data = np.empty(nnz, dtype=np.float64)
        for r, (p, m) in enumerate(rows):
            lo = indptr[r]
            indices[lo:lo + len(p)] = p
            data[lo:lo + len(p)] = 1.0
            indices[lo + len(p):lo + len(p) + len(m)] = m
            data[lo + len(p):lo + len(p) + len(m)] = -1.0
        C = csr_matrix((data, indices, indptr), shape=(len(rows), self.n_cols), copy=False)
        C.has_sorted_indices = False
        return C

    def column_rows(self) -> list[list[tuple[int, int]]]:
        """Transpose: for each column, its (row, +-1) entries."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.n_cols)]
        for r, (p, m) in enumerate(zip(self.plus, self.minus)):
            for j in p.tolist():
                out[j].append((r, 1))
            for j in m.tolist():
                out[j].append((r, -1))
        return out

    def apply(self, x: Sequence) -> tuple:
        """(<e, x>, C x) computed exactly with Python numbers."""
        ex = sum((x[j] for j in self.e.tolist()), 0)
        cx = []
        for p, m in zip(self.plus, self.minus):
            cx.append(sum((x[j] for j in p.tolist()), 0) - sum((x[j] for j in m.tolist()), 0))
        return ex, cx


def build_constraints(G: UnitGraph, include_empty: bool = False,
                      classes: list[list[VertexSet]] | None = None) -> ConstraintSystem:
    """Columns are the nonempty independent sets (plus the empty set first when
    ``include_empty``); rows are the spanning congruence pairs."""
    columns = enumerate_independent_sets(G)
    if classes is None:
        classes = congruence_classes(columns, G)
    if include_empty:
        columns = [0] + columns
    pairs = spanning_pairs(classes)
    masks = np.array(columns, dtype=np.int64)
    e = np.flatnonzero(masks & 1).astype(np.int64)

    cache: dict[VertexSet, np.ndarray] = {}

    def containing(Y: VertexSet) -> np.ndarray:
        hit = cache.get(Y)
        if hit is None:
            hit = (masks & Y) == Y
            if len(cache) < 64:
                cache[Y] = hit
        return hit

    plus, minus = [], []
    for Y, Z in pairs:
        cy = containing(Y)
        cz = containing(Z)
        plus.append(np.flatnonzero(cy & ~cz).astype(np.int32))
        minus.append(np.flatnonzero(cz & ~cy).astype(np.int32))
    return ConstraintSystem(G.n, columns, e, pairs, plus, minus, include_empty)


# -- constraint export -------------------------------------------------------------

def _fmt_set(mask: VertexSet) -> str:
    return ",".join(str(i) for i in bits(mask))


def _constraint_lines(cs: ConstraintSystem):
    yield f"cols {cs.n_cols} rows {cs.n_rows}\n"
    yield "e " + " ".join(str(j) for j in cs.e.tolist()) + "\n"
    for r, ((Y, Z), p, m) in enumerate(zip(cs.pairs, cs.plus, cs.minus)):
        entries = sorted([(j, "+1") for j in p.tolist()] + [(j, "-1") for j in m.tolist()])
        yield (f"row {r} Y={_fmt_set(Y)} Y'={_fmt_set(Z)} "
               + " ".join(f"{j}:{s}" for j, s in entries) + "\n")


def format_constraints(cs: ConstraintSystem) -> str:
    return "".join(_constraint_lines(cs))


def write_constraints(cs: ConstraintSystem, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(_constraint_lines(cs))
