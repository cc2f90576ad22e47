"""Numeric chi_gf of the bundled 27-vertex graph.

    python scripts/g27_numeric.py                      # in-process HiGHS simplex
    python scripts/g27_numeric.py --export g27.lp      # only write the LP file
    GFCOLOUR_LP_SOLVER='highs --model_file {lp} --solution_file {sol}' \\
        python scripts/g27_numeric.py --backend external

The LP has 182303 columns and 16856 rows (about 3.8e7 nonzeros); the
in-process solve takes hours on one core.
"""

import argparse
import time

from gfcolour import lp
from gfcolour.cli import data_path
from gfcolour.udgraph import read_graph


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--backend", choices=["highs", "external"], default="highs")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--export", help="write the LP file and exit")
    p.add_argument("--verbose", action="store_true")
    a = p.parse_args()

    G = read_graph(data_path("g27"))
    t0 = time.time()
    model = lp.chi_gf_model(G)
    print(f"model: {model.n_cols} columns, {model.n_rows} rows ({time.time() - t0:.0f}s)")
    if a.export:
        lp.export_lp(model, a.export)
        print(f"wrote {a.export}")
        return
    sol = lp.solve_numeric(model, backend=a.backend, time_limit=a.time_limit,
                           verbose=a.verbose)
    print(f"status {sol.status}, chi_gf ~ {sol.value}  ({time.time() - t0:.0f}s)")
    for k, v in sol.residuals.items():
        print(f"  {k}: {v}")


if __name__ == "__main__":
    main()
