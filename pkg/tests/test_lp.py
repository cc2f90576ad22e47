import io
import random
import sys
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from gfcolour import lp, simplex
from gfcolour.cli import data_path
from gfcolour.congr import build_constraints
from gfcolour.udgraph import (
    build_graph, enumerate_independent_sets, hall_ratio, independence_ratio, read_points,
)

from .conftest import random_lattice_graph

G27_COLOURS = [3, 4, 4, 2, 1, 4, 2, 4, 3, 1, 4, 1, 2, 3, 2, 4, 4, 3, 2, 4, 2, 3, 1, 4, 2, 3, 4]


def scipy_value(model):
    """Independent float oracle."""
    A = model.A.toarray()
    b = np.array([float(r) for r in model.rhs])
    eq = np.array(model.senses) == "="
    res = linprog(np.ones(model.n_cols),
                  A_ub=-A[~eq] if (~eq).any() else None, b_ub=-b[~eq] if (~eq).any() else None,
                  A_eq=A[eq] if eq.any() else None, b_eq=b[eq] if eq.any() else None,
                  bounds=(0, None), method="highs")
    return res.fun if res.status == 0 else None


def small_graphs(count=30, seed=0, lo=3, hi=10):
    rng = random.Random(seed)
    return [random_lattice_graph(rng.randrange(10**6), rng.randint(lo, hi)) for _ in range(count)]


# -- exact simplex --------------------------------------------------------------

def test_simplex_infeasible():
    res = simplex.solve([1, 1], [{}], ["="], [1], 2)
    assert res.status == simplex.INFEASIBLE


def test_simplex_unbounded():
    res = simplex.solve([-1, 0], [{0: 1, 1: -1}], ["="], [0], 2)
    assert res.status == simplex.UNBOUNDED


def test_simplex_redundant_rows():
    res = simplex.solve([1, 1], [{0: 1, 1: 1}, {0: 2, 1: 2}], ["=", "="], [1, 2], 2)
    assert res.status == simplex.OPTIMAL and res.objective == 1
    assert sum(b * y for b, y in zip([1, 2], res.y)) == 1


def test_simplex_random_against_scipy():
    rng = random.Random(5)
    for _ in range(60):
        n, m = rng.randint(2, 7), rng.randint(1, 5)
        rows = [{j: rng.randint(-3, 4) for j in range(n) if rng.random() < 0.7} for _ in range(m)]
        senses = [rng.choice(["=", ">="]) for _ in range(m)]
        rhs = [rng.randint(-2, 4) for _ in range(m)]
        cost = [rng.randint(0, 5) for _ in range(n)]
        res = simplex.solve(cost, rows, senses, rhs, n)
        A = np.array([[r.get(j, 0) for j in range(n)] for r in rows], dtype=float)
        eq = np.array(senses) == "="
        ref = linprog(cost, A_ub=-A[~eq] if (~eq).any() else None,
                      b_ub=-np.array(rhs, float)[~eq] if (~eq).any() else None,
                      A_eq=A[eq] if eq.any() else None,
                      b_eq=np.array(rhs, float)[eq] if eq.any() else None,
                      bounds=(0, None), method="highs")
        if ref.status == 2:
            assert res.status == simplex.INFEASIBLE
        elif ref.status == 3:
            assert res.status == simplex.UNBOUNDED
        else:
            assert res.status == simplex.OPTIMAL
            assert abs(float(res.objective) - ref.fun) < 1e-9
            # exact feasibility and strong duality
            for r, s, b in zip(rows, senses, rhs):
                lhs = sum(Fraction(v) * res.x[j] for j, v in r.items())
                assert lhs == b if s == "=" else lhs >= b
            assert all(v >= 0 for v in res.x)
            assert sum(Fraction(b) * y for b, y in zip(rhs, res.y)) == res.objective
            for j in range(n):
                red = cost[j] - sum(Fraction(r.get(j, 0)) * y for r, y in zip(rows, res.y))
                assert red >= 0
            assert all(y >= 0 for y, s in zip(res.y, senses) if s == ">=")


# -- chromatic numbers -------------------------------------------------------------

def test_triangle_values(triangle):
    f = lp.chi_f(triangle)
    assert f.objective == 3 and sum(f.y) == 3
    assert lp.chi_gf(triangle).objective == 3
    assert abs(lp.chi_f(triangle, mode="numeric").objective - 3) < 1e-9


def test_single_vertex():
    G = build_graph([(0, 0, 0, 0)])
    assert lp.chi_f(G).objective == 1
    assert lp.chi_gf(G).objective == 1


def test_m7_exact(m7):
    assert lp.chi_f(m7).objective == Fraction(7, 2)
    sol = lp.chi_gf(m7)
    assert sol.status == lp.simplex.OPTIMAL and sol.objective == Fraction(7, 2)
    assert sol.mode == lp.EXACT


def test_m7_numeric(m7):
    sol = lp.chi_gf(m7, mode="numeric")
    assert abs(sol.objective - 3.5) < 1e-9
    assert sol.residuals["gap"] < 1e-8


def test_exact_infeasible_model():
    from scipy.sparse import csr_matrix
    model = lp.LPModel(csr_matrix(np.zeros((1, 3))), ["="], [Fraction(1)])
    assert lp.solve_exact(model).status == simplex.INFEASIBLE
    assert lp.solve_numeric(model).status == simplex.INFEASIBLE


def test_exact_cap(m7):
    with pytest.raises(lp.CapExceeded):
        lp.chi_gf(m7, cap=5)


def test_unknown_mode(m7):
    with pytest.raises(ValueError):
        lp.chi_f(m7, mode="fuzzy")


def test_values_match_scipy_oracle():
    for G in small_graphs(15, seed=1):
        for model in (lp.chi_f_model(G), lp.chi_gf_model(G)):
            exact = lp.solve_exact(model)
            assert abs(float(exact.objective) - scipy_value(model)) < 1e-9


def test_reconstruction_agrees_with_rational_simplex():
    for G in small_graphs(15, seed=6, lo=4, hi=9):
        for model in (lp.chi_f_model(G), lp.chi_gf_model(G)):
            warm = lp.solve_exact(model)
            cold = lp.solve_exact(model, warm=False)
            assert cold.residuals["method"] == "simplex"
            assert warm.objective == cold.objective


def test_reconstruction_rejects_bad_pairs(m7):
    model = lp.chi_gf_model(m7)
    sol = lp.solve_numeric(model)
    assert lp.reconstruct_optimum(model, sol.x, sol.y) is not None
    # a dual that is feasible but not optimal breaks the objective equality
    assert lp.reconstruct_optimum(model, sol.x, [0.0] * model.n_rows) is None
    # a primal point off the constraint set
    x = list(sol.x)
    x[0] += 0.25
    assert lp.reconstruct_optimum(model, x, sol.y) is None


def test_warm_start_does_not_change_simplex_answer():
    for G in small_graphs(10, seed=7, lo=4, hi=8):
        model = lp.chi_gf_model(G)
        rows = [model.row(i) for i in range(model.n_rows)]
        cold = simplex.solve([1] * model.n_cols, rows, model.senses, model.rhs, model.n_cols)
        seeded = simplex.solve([1] * model.n_cols, rows, model.senses, model.rhs,
                               model.n_cols, start=list(range(model.n_cols)))
        assert seeded.objective == cold.objective


def test_numeric_gap_small():
    for G in small_graphs(10, seed=2, lo=8, hi=12):
        sol = lp.solve_numeric(lp.chi_gf_model(G))
        assert sol.status == simplex.OPTIMAL
        assert sol.residuals["gap"] <= 1e-8
        assert sol.residuals["primal_residual"] <= 1e-8


def test_inequalities_between_invariants():
    for G in small_graphs(30, seed=3, hi=12):
        f = lp.chi_f(G).objective
        gf = lp.chi_gf(G).objective
        assert f <= gf
        assert f * independence_ratio(G) >= 1
        assert hall_ratio(G) <= f


def test_monotone_under_induced_subgraphs():
    rng = random.Random(4)
    for G in small_graphs(30, seed=4, lo=4, hi=10):
        H = rng.randrange(1, 1 << G.n)
        sub = G.induced(H)
        assert lp.chi_f(sub).objective <= lp.chi_f(G).objective
        assert lp.chi_gf(sub).objective <= lp.chi_gf(G).objective


def test_regular_restriction_same_optimum():
    for G in small_graphs(20, seed=5):
        assert (lp.solve_exact(lp.chi_f_model(G, regular=True)).objective
                == lp.solve_exact(lp.chi_f_model(G)).objective)


def test_empty_column_does_not_change_optimum(m7):
    with_empty = lp.solve_exact(lp.chi_gf_model(m7, include_empty=True))
    assert with_empty.objective == Fraction(7, 2)


# -- LP text export ---------------------------------------------------------------

def test_export_triangle(triangle):
    text = lp.format_lp(lp.chi_f_model(triangle))
    assert text.count(" >= 1\n") == 3
    assert " obj: x0 + x1 + x2\n" in text
    assert "Bounds\n x0 >= 0\n x1 >= 0\n x2 >= 0\nEnd\n" in text


def test_export_round_trip_hash(m7, tmp_path):
    for model in (lp.chi_f_model(m7), lp.chi_gf_model(m7)):
        path = tmp_path / "m.lp"
        lp.export_lp(model, path)
        back = lp.read_lp(path)
        assert back.canonical_hash() == model.canonical_hash()
        buf = io.StringIO()
        lp.export_lp(model, buf)
        assert buf.getvalue() == path.read_text()
        assert lp.solve_exact(back).objective == Fraction(7, 2)


def test_export_deterministic(m7):
    assert lp.format_lp(lp.chi_gf_model(m7)) == lp.format_lp(lp.chi_gf_model(m7))


def test_external_backend_round_trip(m7, tmp_path, monkeypatch):
    # a stand-in external solver: reads the LP file, solves it, writes "x<j> <value>"
    script = tmp_path / "solver.py"
    script.write_text(
        "import sys\n"
        "from gfcolour import lp\n"
        "m = lp.read_lp(sys.argv[1])\n"
        "s = lp.solve_numeric(m)\n"
        "lp.write_solution(s.x, sys.argv[2])\n")
    monkeypatch.setenv(lp.SOLVER_ENV, f"{sys.executable} {script} {{lp}} {{sol}}")
    sol = lp.solve_numeric(lp.chi_gf_model(m7), backend="external")
    assert sol.status == simplex.OPTIMAL and abs(sol.objective - 3.5) < 1e-9


def test_external_backend_unconfigured(m7, monkeypatch):
    monkeypatch.delenv(lp.SOLVER_ENV, raising=False)
    with pytest.raises(lp.BackendError):
        lp.solve_numeric(lp.chi_gf_model(m7), backend="external")


# -- colourings ---------------------------------------------------------------------

def test_triangle_three_colours(triangle):
    assert lp.verify_colouring_in_gfc(triangle, [1, 2, 3])


def test_colour_out_of_range(triangle):
    with pytest.raises(ValueError):
        lp.check_colouring(triangle, [1, 2, 5], n_colours=3)


def g27_colouring():
    pts = read_points(data_path("g27"))
    return dict(zip(pts, G27_COLOURS))


@pytest.fixture(scope="module")
def g27_pairs(g27):
    from gfcolour.congr import congruence_classes, spanning_pairs
    return spanning_pairs(congruence_classes(enumerate_independent_sets(g27), g27))


def test_g27_colouring_valid(g27, g27_pairs):
    check = lp.check_colouring(g27, g27_colouring(), 4, pairs=g27_pairs)
    assert check.proper and check.e_value == 1 and not check.violated_pairs
    assert check.n_colours == 4


def test_g27_adjacent_same_colour_rejected(g27, g27_pairs):
    col = g27_colouring()
    i, j = g27.edges()[0]
    col[g27.vertices[j]] = col[g27.vertices[i]]
    assert not lp.check_colouring(g27, col, 4, pairs=g27_pairs).proper


def test_colouring_vector_in_kernel(m7):
    # a proper colouring satisfying the congruence rows gives C x = 0 exactly
    for G in [build_graph([(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0)])]:
        cs = build_constraints(G)
        x = lp.colouring_vector(G, [1, 2, 3], cs.columns)
        ex, cx = cs.apply(x)
        assert ex == 1 and all(v == 0 for v in cx)


def test_check_matches_full_system(m7):
    # compare the pair shortcut against C x computed row by row
    cs = build_constraints(m7)
    rng = random.Random(3)
    for _ in range(200):
        colours = [rng.randint(1, 4) for _ in range(m7.n)]
        check = lp.check_colouring(m7, colours, 4, pairs=cs.pairs)
        if not check.proper:
            continue
        ex, cx = cs.apply(lp.colouring_vector(m7, colours, cs.columns, 4))
        assert check.valid == (ex == 1 and all(v == 0 for v in cx))
