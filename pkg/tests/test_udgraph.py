import functools
import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfcolour.cli import data_path
from gfcolour.field import MoserPoint, is_unit_distance
from gfcolour.udgraph import (
    DuplicatePointError, SizeCapError, WeightFunction, aggregate, bits, build_graph,
    count_independent_sets, cube_colouring, deaggregate, enumerate_independent_sets,
    format_points, hall_ratio, independence_number, independence_ratio, mask_of,
    max_independent_set, parse_points, read_points, restrict_colouring, subsets_of,
)

from .conftest import TRIANGLE, random_lattice_graph

# transcribed by hand, independently of the bundled data files
G27_COLUMNS = [
    (1, 4, 2, 0), (0, 4, 3, 0), (2, 3, 0, 1), (2, 3, 1, 1), (1, 3, 2, 1), (2, 3, 2, 1),
    (1, 4, 2, 1), (1, 2, 3, 1), (1, 3, 3, 1), (0, 4, 3, 1), (3, 3, 0, 2), (3, 2, 1, 2),
    (1, 3, 1, 2), (2, 3, 1, 2), (2, 2, 2, 2), (1, 3, 2, 2), (0, 2, 3, 2), (0, 3, 3, 2),
    (0, 2, 4, 2), (3, 0, 1, 3), (2, 1, 1, 3), (3, 1, 1, 3), (1, 1, 2, 3), (2, 1, 2, 3),
    (1, 2, 2, 3), (2, 2, 2, 3), (3, 1, 0, 4),
]
M7_POINTS = [(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1),
             (1, 1, 0, 0), (0, 0, 1, 1)]
G27_COLOURS = [3, 4, 4, 2, 1, 4, 2, 4, 3, 1, 4, 1, 2, 3, 2, 4, 4, 3, 2, 4, 2, 3, 1, 4, 2, 3, 4]


def brute_independent(G):
    out = []
    for r in range(1, G.n + 1):
        for combo in itertools.combinations(range(G.n), r):
            if all(not G.adjacent(i, j) for i, j in itertools.combinations(combo, 2)):
                out.append(mask_of(combo))
    return out


def brute_alpha(G, mask=None):
    idx = bits(G.full if mask is None else mask)
    for r in range(len(idx), 0, -1):
        for combo in itertools.combinations(idx, r):
            if all(not G.adjacent(i, j) for i, j in itertools.combinations(combo, 2)):
                return r
    return 0


def random_weight(rng, G, k=6):
    sets = enumerate_independent_sets(G)
    return WeightFunction({s: Fraction(rng.randint(1, 9), rng.randint(1, 5))
                           for s in rng.sample(sets, min(k, len(sets)))})


# -- transcription and files ---------------------------------------------------

def test_bundled_g27_matches_transcription():
    assert read_points(data_path("g27")) == [MoserPoint(*p) for p in G27_COLUMNS]


def test_bundled_m7_matches_transcription():
    assert read_points(data_path("m7")) == [MoserPoint(*p) for p in M7_POINTS]


def test_bundled_colouring_matches_transcription():
    text = data_path("g27-colouring").read_text(encoding="utf-8")
    assert [int(t) for t in text.split()] == G27_COLOURS


@pytest.mark.parametrize("name", ["m7", "g27", "g27-colouring"])
def test_bundled_files_round_trip_bytes(name):
    raw = data_path(name).read_bytes()
    if name == "g27-colouring":
        assert (" ".join(raw.decode().split()) + "\n").encode() == raw
    else:
        assert format_points(parse_points(raw.decode("utf-8"))).encode("utf-8") == raw


def test_parse_skips_comments_and_keeps_order():
    pts = parse_points("# header\n1 0 0 0\n\n0 0 0 0\n")
    assert pts == [MoserPoint(1, 0, 0, 0), MoserPoint(0, 0, 0, 0)]


# -- construction --------------------------------------------------------------

def test_triangle(triangle):
    assert triangle.n == 3
    assert len(triangle.edges()) == 3


def test_m7_edges_match_pairwise_oracle(m7):
    expected = sum(is_unit_distance(p, q) for p, q in itertools.combinations(M7_POINTS, 2))
    assert len(m7.edges()) == expected == 11


def test_g27_vertex_count(g27):
    assert g27.n == 27


def test_vertices_sorted_and_adjacency_exact():
    G = build_graph([(2, 0, 0, 0), (0, 0, 0, 0), (1, 0, 0, 0)])
    assert list(G.vertices) == sorted(G.vertices)
    for i, j in itertools.combinations(range(G.n), 2):
        assert G.adjacent(i, j) == is_unit_distance(G.vertices[i], G.vertices[j])
        assert G.adjacent(i, j) == G.adjacent(j, i)
    assert not any(G.adjacent(i, i) for i in range(G.n))


def test_duplicate_point_names_duplicate():
    with pytest.raises(DuplicatePointError, match="1 0 0 0|\\(1, 0, 0, 0\\)"):
        build_graph([(1, 0, 0, 0), (0, 0, 0, 0), (1, 0, 0, 0)])


# -- independent sets ----------------------------------------------------------

def test_triangle_independent_sets(triangle):
    assert enumerate_independent_sets(triangle) == [1, 2, 4]


def test_m7_independent_sets_match_brute_force(m7):
    assert enumerate_independent_sets(m7) == brute_independent(m7)
    assert count_independent_sets(m7) == 17


@pytest.mark.parametrize("seed", range(8))
def test_enumeration_exhaustive_small(seed):
    G = random_lattice_graph(seed, 8 + seed % 8)
    listed = enumerate_independent_sets(G)
    assert listed == brute_independent(G)
    listed_set = set(listed)
    for mask in range(1, 1 << G.n):
        assert (mask in listed_set) == G.is_independent(mask)


def test_enumeration_order():
    G = random_lattice_graph(3, 10)
    sets = enumerate_independent_sets(G)
    assert sets == sorted(sets, key=lambda s: (s.bit_count(), bits(s)))


def test_alpha_examples(triangle, m7):
    assert independence_number(triangle) == 1
    assert independence_ratio(triangle) == Fraction(1, 3)
    assert independence_number(m7) == 2 == brute_alpha(m7)
    assert independence_ratio(m7) == Fraction(2, 7)
    single = build_graph([(0, 0, 0, 0)])
    assert independence_number(single) == 1 and independence_ratio(single) == 1


@pytest.mark.parametrize("seed", range(10))
def test_max_independent_set_matches_brute_force(seed):
    G = random_lattice_graph(100 + seed, 14)
    s = max_independent_set(G.nbr)
    assert G.is_independent(s)
    assert s.bit_count() == brute_alpha(G)


def test_hall_ratio_examples(triangle, m7):
    assert hall_ratio(triangle) == 3
    edgeless = build_graph([(0, 0, 0, 0), (2, 0, 0, 0), (4, 0, 0, 0)])
    assert hall_ratio(edgeless) == 1


def test_hall_ratio_m7_brute_force(m7):
    best = max(Fraction(mask.bit_count(), brute_alpha(m7, mask)) for mask in range(1, 1 << 7))
    assert hall_ratio(m7) == best == Fraction(7, 2)


def test_hall_ratio_cap(g27):
    with pytest.raises(SizeCapError):
        hall_ratio(g27)


# -- weight functions ----------------------------------------------------------

def test_aggregate_examples(triangle):
    g = aggregate(WeightFunction({0: Fraction(0), 1: Fraction(1)}))
    assert g[0] == 1 and g[1] == 1
    g = aggregate(WeightFunction({1: Fraction(1), 2: Fraction(1), 4: Fraction(1)}))
    assert g[0] == 3 and all(g[s] == 1 for s in (1, 2, 4))


@pytest.mark.parametrize("seed", range(5))
def test_aggregate_matches_double_sum(seed):
    rng = random.Random(seed)
    G = random_lattice_graph(seed, 8)
    gamma = random_weight(rng, G)
    gbar = aggregate(gamma)
    for S in range(1 << G.n):
        direct = sum((w for T, w in gamma.values.items() if T & S == S), Fraction(0))
        assert gbar[S] == direct


def test_deaggregate_zero():
    assert deaggregate(WeightFunction({0: Fraction(0)})).nonzero() == {}


def test_aggregate_round_trip_many():
    rng = random.Random(11)
    for trial in range(100):
        G = random_lattice_graph(rng.randrange(10**6), rng.randint(3, 10))
        gamma = random_weight(rng, G, k=rng.randint(1, 8))
        assert deaggregate(aggregate(gamma)).nonzero() == gamma.nonzero()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_aggregate_monotone(seed):
    rng = random.Random(seed)
    G = random_lattice_graph(seed, rng.randint(3, 9))
    gbar = aggregate(random_weight(rng, G))
    for S in gbar.values:
        for sub in subsets_of(S):
            assert gbar[sub] >= gbar[S]


def test_restrict_identity():
    rng = random.Random(2)
    G = random_lattice_graph(2, 7)
    gamma = random_weight(rng, G)
    assert restrict_colouring(gamma, G.full).nonzero() == gamma.nonzero()


def test_restrict_triangle_single_vertex(triangle):
    gamma = WeightFunction({1: Fraction(1), 2: Fraction(1), 4: Fraction(1)})
    h = restrict_colouring(gamma, 1)
    # direct summation: S = {v}: sets containing v; S = {}: the others
    assert h[1] == 1 and h[0] == 2 and h.weight() == 3


def test_restriction_identities_random():
    rng = random.Random(5)
    for trial in range(100):
        G = random_lattice_graph(rng.randrange(10**6), rng.randint(2, 10))
        gamma = random_weight(rng, G, k=rng.randint(1, 8))
        H = rng.randrange(1, 1 << G.n)
        gh = restrict_colouring(gamma, H)
        rest = G.full & ~H
        # definition: gamma_H(S) = sum over Y outside H of gamma(S | Y)
        for S in subsets_of(H):
            direct = sum((gamma[S | Y] for Y in subsets_of(rest)), Fraction(0))
            assert gh[S] == direct
        assert gh.weight() == gamma.weight()
        agg, agg_h = aggregate(gamma), aggregate(gh)
        for S in subsets_of(H):
            assert agg_h[S] == agg[S]


def test_restrict_empty_rejected():
    with pytest.raises(ValueError):
        restrict_colouring(WeightFunction({1: Fraction(1)}), 0)


# -- cube colouring ------------------------------------------------------------

def test_cube_single_vertex_n0():
    G = build_graph([(0, 0, 0, 0)])
    res = cube_colouring(G, 0)
    assert res.gamma.nonzero() == {1: Fraction(1)}
    assert res.weight == 1


def test_cube_triangle_matches_set_oracle(triangle):
    res = cube_colouring(triangle, 1)
    B = set(res.independent)
    pts = list(triangle.vertices)
    # t ranges over G - B; M_t = G & (B + t)
    ts = {g - b for g in pts for b in B}
    nonempty = {t for t in ts if any(g - t in B for g in pts)}
    assert res.translations == len(nonempty)
    assert res.weight == Fraction(len(nonempty), len(B))
    assert res.gamma.is_regular_colouring(triangle)
    assert res.weight <= res.bound


@pytest.mark.parametrize("seed", range(6))
def test_cube_colouring_regular(seed):
    G = random_lattice_graph(seed, 3 + seed)
    res = cube_colouring(G, 1)
    assert res.gamma.is_regular_colouring(G)
    assert all(G.is_independent(s) for s in res.gamma.support())
    assert res.gamma.weight() == res.weight == Fraction(res.translations, len(res.independent))
    cube = build_graph(itertools.product(range(-1, 2), repeat=4))
    assert cube.is_independent(mask_of(cube.index(p) for p in res.independent))
    assert len(res.independent) == cube_alpha_oracle()


@functools.lru_cache(maxsize=1)
def cube_alpha_oracle():
    nx = pytest.importorskip("networkx")
    cube = build_graph(itertools.product(range(-1, 2), repeat=4))
    g = nx.Graph()
    g.add_nodes_from(range(cube.n))
    g.add_edges_from(cube.edges())
    return nx.max_weight_clique(nx.complement(g), weight=None)[1]


def test_cube_cap():
    with pytest.raises(SizeCapError):
        cube_colouring(build_graph([(0, 0, 0, 0)]), 2)
    with pytest.raises(ValueError):
        cube_colouring(build_graph([(0, 0, 0, 0)]), -1)
