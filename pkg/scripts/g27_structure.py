"""Counts and the colouring upper bound for the bundled 27-vertex graph.

    python scripts/g27_structure.py [--certify]

``--certify`` also runs the lower-bound certificate at t = 4, which needs
a solve of the full dual (hours, several GB of memory).
"""

import argparse
import json
import time
from fractions import Fraction

from gfcolour import certify, lp
from gfcolour.cli import data_path
from gfcolour.congr import build_constraints
from gfcolour.udgraph import count_independent_sets, read_graph, read_points


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--certify", action="store_true")
    p.add_argument("--witness", help="where to write the witness when certifying")
    a = p.parse_args()

    G = read_graph(data_path("g27"))
    t0 = time.time()
    n = count_independent_sets(G)
    print(f"independent sets: {n} nonempty, {n + 1} with the empty set")
    cs = build_constraints(G)
    print(f"spanning congruence constraints: {cs.n_rows}; columns: {cs.n_cols}; "
          f"nonzeros in C: {cs.matrix().nnz}  ({time.time() - t0:.0f}s)")

    colours = [int(c) for c in open(data_path("g27-colouring")).read().split()]
    check = lp.check_colouring(G, dict(zip(read_points(data_path("g27")), colours)), 4,
                               pairs=cs.pairs)
    print(f"bundled colouring: proper {check.proper}, <e,x> = {check.e_value}, "
          f"violated rows {len(check.violated_pairs)}  => chi_gf <= {check.n_colours}")

    if a.certify:
        cert = certify.certify_chi_gf(G, Fraction(4), system=cs, verbose=True)
        rep = cert.report()
        rep.pop("sharp_set", None)
        print(json.dumps(rep, indent=2, sort_keys=True))
        if a.witness and cert.witness is not None:
            certify.write_witness(cert.witness, Fraction(4), a.witness)


if __name__ == "__main__":
    main()
