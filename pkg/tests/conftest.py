import itertools
import random

import numpy as np
import pytest
from hypothesis import strategies as st

from gfcolour.cli import data_path
from gfcolour.field import UNIT_STEPS, MoserPoint, sq_dist
from gfcolour.udgraph import build_graph, read_graph

TRIANGLE = [(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0)]


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true",
                     help="also run the multi-hour checks (numeric G27 LP, G27 certificate)")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: takes minutes to hours")


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture(scope="session")
def m7():
    return read_graph(data_path("m7"))


@pytest.fixture(scope="session")
def g27():
    return read_graph(data_path("g27"))


@pytest.fixture
def triangle():
    return build_graph(TRIANGLE)


def random_walk_points(rng: random.Random, n: int, steps=UNIT_STEPS) -> list[MoserPoint]:
    """n distinct lattice points grown by unit steps, so the graph is connected-ish."""
    pts = [MoserPoint(0, 0, 0, 0)]
    seen = set(pts)
    while len(pts) < n:
        p = rng.choice(pts) + rng.choice(steps)
        if p not in seen:
            seen.add(p)
            pts.append(p)
    return pts


def random_lattice_graph(seed: int, n: int):
    return build_graph(random_walk_points(random.Random(seed), n))


coeff = st.integers(min_value=-6, max_value=6)
points = st.tuples(coeff, coeff, coeff, coeff).map(lambda t: MoserPoint(*t))
point_sets = st.sets(points, min_size=1, max_size=8)


def congruent_oracle(Y, Z):
    """All bijections, exact distances."""
    Y, Z = list(Y), list(Z)
    if len(Y) != len(Z):
        return False
    for perm in itertools.permutations(Z):
        if all(sq_dist(Y[i], Y[j]) == sq_dist(perm[i], perm[j])
               for i in range(len(Y)) for j in range(i + 1, len(Y))):
            return True
    return False


def chi_gf_oracle(points):
    """chi_gf with a row for every congruent pair (not a spanning subset),
    congruence by brute force and scipy's solver; float result."""
    from scipy.optimize import linprog

    G = build_graph(points)
    ind = [S for S in range(1, 1 << G.n) if G.is_independent(S)]

    def pts(S):
        return [G.vertices[i] for i in range(G.n) if S >> i & 1]

    rows = [[1.0 if S & 1 else 0.0 for S in ind]]
    for a, b in itertools.combinations(ind, 2):
        if a.bit_count() == b.bit_count() and congruent_oracle(pts(a), pts(b)):
            rows.append([float(S & a == a) - float(S & b == b) for S in ind])
    rhs = np.zeros(len(rows))
    rhs[0] = 1
    res = linprog(np.ones(len(ind)), A_eq=np.array(rows), b_eq=rhs, bounds=(0, None),
                  method="highs")
    return res.fun
