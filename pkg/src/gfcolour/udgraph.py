"""Unit-distance graphs on the Moser lattice and fractional-colouring data.

Vertex subsets are plain ``int`` bitmasks over vertex indices: bit ``i`` set
means vertex ``i`` is in the set.  Index order is the sorted (lexicographic)
order of the Moser coefficients.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .field import Coeffs, MoserPoint, is_unit_distance

VertexSet = int


class DuplicatePointError(ValueError):
    pass


class SizeCapError(ValueError):
    pass


def bits(mask: VertexSet) -> list[int]:
    """Ascending indices of the set bits of ``mask``."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(indices: Iterable[int]) -> VertexSet:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def set_order_key(mask: VertexSet) -> tuple[int, list[int]]:
    """Sort key: size first, then lexicographic on ascending indices."""
    return mask.bit_count(), bits(mask)


@dataclass(frozen=True)
class UnitGraph:
    vertices: tuple[MoserPoint, ...]
    nbr: tuple[int, ...]  # nbr[i] is the neighbour bitmask of vertex i

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def full(self) -> VertexSet:
        return (1 << len(self.vertices)) - 1

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.nbr[i] >> j & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in bits(self.nbr[i]) if i < j]

    def is_independent(self, mask: VertexSet) -> bool:
        for i in bits(mask):
            if self.nbr[i] & mask:
                return False
        return True

    def index(self, p: Coeffs) -> int:
        return self._index[MoserPoint(*p)]

    @property
    def _index(self) -> dict[MoserPoint, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {p: i for i, p in enumerate(self.vertices)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def points(self, mask: VertexSet) -> list[MoserPoint]:
        return [self.vertices[i] for i in bits(mask)]

    def induced(self, mask: VertexSet) -> UnitGraph:
        return build_graph(self.points(mask))


def build_graph(points: Iterable[Coeffs]) -> UnitGraph:
    pts = [MoserPoint(*p) for p in points]
    seen: set[MoserPoint] = set()
    for p in pts:
        if p in seen:
            raise DuplicatePointError(f"duplicate vertex {tuple(p)}")
        seen.add(p)
    pts.sort()
    n = len(pts)
    nbr = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if is_unit_distance(pts[i], pts[j]):
                nbr[i] |= 1 << j
                nbr[j] |= 1 << i
    return UnitGraph(tuple(pts), tuple(nbr))


# -- graph file format ------------------------------------------------------

def parse_points(text: str) -> list[MoserPoint]:
    pts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        fields = s.split()
        if len(fields) != 4:
            raise ValueError(f"line {lineno}: expected 4 integers, got {line!r}")
        pts.append(MoserPoint(*(int(f) for f in fields)))
    return pts


def format_points(points: Iterable[Coeffs]) -> str:
    return "".join(f"{p[0]} {p[1]} {p[2]} {p[3]}\n" for p in points)


def read_points(path: str | Path) -> list[MoserPoint]:
    return parse_points(Path(path).read_text(encoding="utf-8"))


def write_points(points: Iterable[Coeffs], path: str | Path) -> None:
    Path(path).write_text(format_points(points), encoding="utf-8")


def read_graph(path: str | Path) -> UnitGraph:
    return build_graph(read_points(path))


# -- independent sets --------------------------------------------------------

def iter_independent_sets(G: UnitGraph) -> Iterator[VertexSet]:
    """All nonempty independent sets, in no particular order."""
    nbr = G.nbr
    stack = [(0, G.full)]
    while stack:
        current, cand = stack.pop()
        while cand:
            low = cand & -cand
            cand ^= low
            v = low.bit_length() - 1
            s = current | low
            yield s
            rest = cand & ~nbr[v]
            if rest:
                stack.append((s, rest))


def enumerate_independent_sets(G: UnitGraph) -> list[VertexSet]:
    """Nonempty independent sets ordered by (size, ascending index sequence)."""
    return sorted(iter_independent_sets(G), key=set_order_key)


def count_independent_sets(G: UnitGraph) -> int:
    return sum(1 for _ in iter_independent_sets(G))


def max_independent_set(nbr: Sequence[int], candidates: int | None = None) -> VertexSet:
    """Exact maximum independent set by branch and bound on bitmasks."""
    if candidates is None:
        candidates = (1 << len(nbr)) - 1
    best = [0, 0]  # size, mask

    def clique_cover_bound(P: int) -> int:
        # greedy partition of P into cliques; an independent set takes <= 1 per clique
        count = 0
        while P:
            low = P & -P
            clique = low
            common = nbr[low.bit_length() - 1] & P
            while common:
                w = common & -common
                clique |= w
                common &= nbr[w.bit_length() - 1]
            P &= ~clique
            count += 1
        return count

    def rec(size: int, chosen: int, P: int) -> None:
        # forced picks: vertices with degree <= 1 inside P
        changed = True
        while changed and P:
            changed = False
            Q = P
            while Q:
                low = Q & -Q
                Q ^= low
                if not P & low:
                    continue
                v = low.bit_length() - 1
                if (nbr[v] & P).bit_count() <= 1:
                    chosen |= low
                    size += 1
                    P &= ~(low | nbr[v])
                    changed = True
        if not P:
            if size > best[0]:
                best[0], best[1] = size, chosen
            return
        if size + P.bit_count() <= best[0]:
            return
        if size + clique_cover_bound(P) <= best[0]:
            return
        v, deg = -1, -1
        Q = P
        while Q:
            low = Q & -Q
            Q ^= low
            u = low.bit_length() - 1
            du = (nbr[u] & P).bit_count()
            if du > deg:
                v, deg = u, du
        bit = 1 << v
        rec(size + 1, chosen | bit, P & ~(bit | nbr[v]))
        rec(size, chosen, P & ~bit)

    rec(0, 0, candidates)
    return best[1]


def independence_number(G: UnitGraph) -> int:
    return max_independent_set(G.nbr).bit_count()


def independence_ratio(G: UnitGraph) -> Fraction:
    return Fraction(independence_number(G), G.n)


def hall_ratio(G: UnitGraph, cap: int = 20) -> Fraction:
    """max |H| / alpha(H) over nonempty induced subgraphs H."""
    n = G.n
    if n > cap:
        raise SizeCapError(f"hall_ratio is exhaustive; {n} vertices exceeds cap {cap}")
    closed = [G.nbr[i] | (1 << i) for i in range(n)]
    alpha = bytearray(1 << n)
    best_num, best_den = 0, 1
    for mask in range(1, 1 << n):
        low = mask & -mask
        v = low.bit_length() - 1
        a = alpha[mask ^ low]
        b = 1 + alpha[mask & ~closed[v]]
        a = a if a > b else b
        alpha[mask] = a
        size = mask.bit_count()
        if size * best_den > best_num * a:
            best_num, best_den = size, a
    return Fraction(best_num, best_den)


# -- weight functions ----------------------------------------------------------

@dataclass
class WeightFunction:
    """Sparse map from vertex subsets (bitmasks) to exact weights."""

    values: dict[VertexSet, Fraction] = field(default_factory=dict)
    regular: bool = False

    def __getitem__(self, s: VertexSet) -> Fraction:
        return self.values.get(s, Fraction(0))

    def weight(self) -> Fraction:
        return sum(self.values.values(), Fraction(0))

    def support(self) -> list[VertexSet]:
        return sorted((s for s, w in self.values.items() if w), key=set_order_key)

    def coverage(self, v: int) -> Fraction:
        """Total weight of sets containing vertex ``v``."""
        return sum((w for s, w in self.values.items() if s >> v & 1), Fraction(0))

    def nonzero(self) -> dict[VertexSet, Fraction]:
        return {s: w for s, w in self.values.items() if w}

    def is_fractional_colouring(self, G: UnitGraph) -> bool:
        if any(w < 0 for w in self.values.values()):
            return False
        if any(w and not G.is_independent(s) for s, w in self.values.items()):
            return False
        return all(self.coverage(v) >= 1 for v in range(G.n))

    def is_regular_colouring(self, G: UnitGraph) -> bool:
        return self.is_fractional_colouring(G) and all(
            self.coverage(v) == 1 for v in range(G.n))


def subsets_of(mask: VertexSet) -> Iterator[VertexSet]:
    """Every subset of ``mask`` including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def aggregate(gamma: WeightFunction) -> WeightFunction:
    """gamma_bar(S) = sum of gamma(S') over S' containing S (S' = S included).

    Defined on every subset of every support set, the empty set included, so
    ``gamma_bar[0]`` is the weight.
    """
    out: dict[VertexSet, Fraction] = {}
    for s, w in gamma.values.items():
        for sub in subsets_of(s):
            out[sub] = out.get(sub, Fraction(0)) + w
    if not out:
        out[0] = Fraction(0)
    return WeightFunction(out, gamma.regular)


def deaggregate(gamma_bar: WeightFunction) -> WeightFunction:
    """Inclusion-exclusion inverse of :func:`aggregate`.

    ``gamma_bar`` must be defined on a subset-closed family; entries outside
    the family count as zero.
    """
    family = gamma_bar.values
    supersets: dict[VertexSet, list[VertexSet]] = {s: [] for s in family}
    for t in family:
        for sub in subsets_of(t):
            if sub in supersets:
                supersets[sub].append(t)
    out = {}
    for s, sups in supersets.items():
        total = Fraction(0)
        for t in sups:
            if (t ^ s).bit_count() & 1:
                total -= family[t]
            else:
                total += family[t]
        if total:
            out[s] = total
    return WeightFunction(out, gamma_bar.regular)


def restrict_colouring(gamma: WeightFunction, H: VertexSet) -> WeightFunction:
    """Induced colouring on the vertex subset ``H``.

    gamma_H(S) = sum over Y outside H of gamma(S | Y).  Keys stay in the
    parent graph's index space (all of them are subsets of ``H``); the empty
    set collects the weight of sets missing ``H`` so the total is preserved.
    """
    if not H:
        raise ValueError("restriction target must be nonempty")
    out: dict[VertexSet, Fraction] = {}
    for s, w in gamma.values.items():
        key = s & H
        out[key] = out.get(key, Fraction(0)) + w
    return WeightFunction(out, gamma.regular)


# -- discrete cube colouring -----------------------------------------------------

@dataclass
class CubeColouring:
    gamma: WeightFunction
    weight: Fraction
    cube_size: int
    independent: list[MoserPoint]  # B, a maximum independent subset of the cube
    translations: int  # |G - B|
    bound: Fraction  # (2N + 2k + 1)^4 / |B|


def cube_colouring(G: UnitGraph, N: int, cap: int = 81) -> CubeColouring:
    """Regular fractional colouring of G from translates of a cube's independent set.

    A is the coefficient cube [-N, N]^4 and B a maximum independent subset of
    it.  Each lattice translate B + t meets G in an independent set M_t;
    gamma(S) counts the translates with M_t = S, divided by |B|.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    side = 2 * N + 1
    if side ** 4 > cap:
        raise SizeCapError(f"cube has {side ** 4} points, cap is {cap}")
    A = [MoserPoint(*c) for c in itertools.product(range(-N, N + 1), repeat=4)]
    cube = build_graph(A)
    B = cube.points(max_independent_set(cube.nbr))
    Bset = set(B)

    index = {p: i for i, p in enumerate(G.vertices)}
    hits: dict[MoserPoint, int] = {}
    for g in G.vertices:
        for b in B:
            t = g - b
            if t not in hits:
                m = 0
                for h, i in index.items():
                    if h - t in Bset:
                        m |= 1 << i
                hits[t] = m
    nB = len(B)
    values: dict[VertexSet, Fraction] = {}
    for m in hits.values():
        values[m] = values.get(m, Fraction(0)) + Fraction(1, nB)
    k = max((abs(x) for p in G.vertices for x in p), default=0)
    return CubeColouring(
        gamma=WeightFunction(values, regular=True),
        weight=Fraction(len(hits), nB),
        cube_size=len(A),
        independent=B,
        translations=len(hits),
        bound=Fraction((2 * N + 2 * k + 1) ** 4, nB),
    )
