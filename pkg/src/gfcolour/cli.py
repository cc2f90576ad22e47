"""Command line interface: ``gfcolour <group> <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 computation failure, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import certify, congr, lp, search, udgraph
from .udgraph import bits

EXIT_USAGE, EXIT_COMPUTE, EXIT_VERIFY = 1, 2, 3

BUNDLED = {"m7": "m7.txt", "g27": "g27.txt", "g27-colouring": "g27_colouring.txt"}


class ComputationError(Exception):
    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class VerificationFailure(Exception):
    pass


@dataclass
class RunConfig:
    """Resolved settings of one invocation; defaults are the tool-wide constants."""

    command: str
    inputs: list[str] = field(default_factory=list)
    output: str | None = None
    mode: str = "exact"
    feas_tol: float = lp.FEAS_TOL
    value_tol: float = lp.VALUE_TOL
    epsilon: float = certify.DEFAULT_EPSILON
    beam_width: int | None = 100
    workers: int = 1
    stop: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, a: argparse.Namespace) -> RunConfig:
        cmd = " ".join(x for x in (a.group, getattr(a, "action", None)) if x)
        inputs = [getattr(a, k) for k in ("graph", "start", "colouring", "witness")
                  if isinstance(getattr(a, k, None), str)]
        cfg = cls(cmd, inputs, getattr(a, "output", None))
        if getattr(a, "numeric", False) or (a.group == "search" and not a.exact):
            cfg.mode = "numeric"
        for k in ("feas_tol", "value_tol", "epsilon", "workers"):
            if getattr(a, k, None) is not None:
                setattr(cfg, k, getattr(a, k))
        if getattr(a, "beam_width", None) is not None:
            cfg.beam_width = None if a.beam_width <= 0 else a.beam_width
        cfg.stop = {k: getattr(a, k) for k in ("target", "max_iterations", "max_size", "time_limit")
                    if getattr(a, k, None) is not None}
        return cfg


def data_path(name: str) -> Path:
    return Path(str(resources.files("gfcolour") / "data" / BUNDLED[name]))


def resolve_graph_path(arg: str) -> Path:
    return data_path(arg) if arg in BUNDLED else Path(arg)


def load_graph(arg: str) -> udgraph.UnitGraph:
    return udgraph.read_graph(resolve_graph_path(arg))


def parse_colours(text: str) -> list[int]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        out.extend(int(tok) for tok in line.split())
    return out


def fmt_value(v) -> str:
    """Exact rational (when there is one) followed by a 12-digit decimal."""
    if isinstance(v, Fraction):
        return f"{v} ({float(v):.12f})"
    return f"{float(v):.12f}"


def emit(obj) -> None:
    if isinstance(obj, str):
        print(obj)
    else:
        print(json.dumps(obj, indent=2, sort_keys=True, default=str))


# -- handlers --------------------------------------------------------------------------

def cmd_graph_info(a) -> int:
    G = load_graph(a.graph)
    emit({"vertices": G.n, "edges": len(G.edges()),
          "max_degree": max((m.bit_count() for m in G.nbr), default=0),
          "hash": certify.graph_hash(G)})
    return 0


def cmd_indep(a) -> int:
    G = load_graph(a.graph)
    if a.action == "count":
        n = udgraph.count_independent_sets(G)
        if a.json:
            emit({"nonempty": n, "with_empty": n + 1,
                  "convention": "empty set excluded from LP columns by default"})
        elif a.with_empty:
            print(n + 1)
        else:
            print(n)
            print(f"# empty set excluded; {n + 1} including it", file=sys.stderr)
        return 0
    out = sys.stdout if a.output in (None, "-") else open(a.output, "w", encoding="utf-8")
    try:
        for s in udgraph.enumerate_independent_sets(G):
            out.write(" ".join(map(str, bits(s))) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_alpha(a) -> int:
    G = load_graph(a.graph)
    r = udgraph.independence_ratio(G)
    emit({"alpha": udgraph.independence_number(G), "ratio": str(r), "ratio_decimal": float(r)})
    return 0


def cmd_hall(a) -> int:
    G = load_graph(a.graph)
    try:
        r = udgraph.hall_ratio(G, cap=a.cap)
    except udgraph.SizeCapError as exc:
        raise ComputationError("hall_ratio", str(exc))
    print(fmt_value(r))
    return 0


def cmd_congr(a) -> int:
    G = load_graph(a.graph)
    cols = udgraph.enumerate_independent_sets(G)
    classes = congr.congruence_classes(cols, G)
    if a.action == "classes":
        emit({"independent_sets": len(cols), "classes": len(classes),
              "spanning_pairs": sum(len(c) - 1 for c in classes),
              "largest_class": max((len(c) for c in classes), default=0)})
        return 0
    cs = congr.build_constraints(G, include_empty=a.include_empty, classes=classes)
    if a.output in (None, "-"):
        sys.stdout.write(congr.format_constraints(cs))
    else:
        congr.write_constraints(cs, a.output)
        emit({"cols": cs.n_cols, "rows": cs.n_rows, "file": a.output})
    return 0


def _solve_report(sol: lp.Solution) -> dict:
    out = {"status": sol.status, "mode": sol.mode}
    if sol.objective is not None:
        out["value"] = str(sol.objective) if isinstance(sol.objective, Fraction) else sol.objective
        out["value_decimal"] = f"{float(sol.objective):.12f}"
    out.update({k: v for k, v in sol.residuals.items()})
    return out


def cmd_lp(a) -> int:
    G = load_graph(a.graph)
    if a.action == "export":
        model = lp.chi_f_model(G) if a.model == "chif" else lp.chi_gf_model(
            G, include_empty=a.include_empty)
        lp.export_lp(model, a.output)
        emit({"variables": model.n_cols, "constraints": model.n_rows, "file": a.output,
              "hash": model.canonical_hash()})
        return 0
    model = lp.chi_f_model(G) if a.action == "chif" else lp.chi_gf_model(G)
    try:
        if a.numeric:
            sol = lp.solve_numeric(model, backend=a.backend, feas_tol=a.feas_tol)
        else:
            sol = lp.solve_exact(model, cap=a.cap)
    except (lp.CapExceeded, lp.BackendError) as exc:
        raise ComputationError("lp", str(exc))
    if sol.status != "optimal":
        raise ComputationError("lp", f"solver status {sol.status}")
    if a.json:
        emit(_solve_report(sol))
    else:
        print(sol.objective if isinstance(sol.objective, Fraction) else fmt_value(sol.objective))
    return 0


def cmd_colouring_verify(a) -> int:
    G = load_graph(a.graph)
    points = udgraph.read_points(resolve_graph_path(a.graph))
    colours = parse_colours(Path(resolve_graph_path(a.colouring)).read_text(encoding="utf-8"))
    if len(colours) != len(points):
        raise ComputationError("colouring", f"{len(colours)} colours for {len(points)} vertices")
    try:
        check = lp.check_colouring(G, dict(zip(points, colours)), a.colours)
    except ValueError as exc:
        raise ComputationError("colouring", str(exc))
    if not check.valid:
        reasons = []
        if not check.proper:
            reasons.append("not a proper colouring")
        if check.violated_pairs:
            reasons.append(f"{len(check.violated_pairs)} congruence rows violated")
        raise VerificationFailure("invalid gfc colouring: " + "; ".join(reasons))
    print(f"valid gfc colouring, weight {check.n_colours}")
    return 0


def cmd_cube(a) -> int:
    G = load_graph(a.graph)
    try:
        res = udgraph.cube_colouring(G, a.N, cap=a.cap)
    except udgraph.SizeCapError as exc:
        raise ComputationError("cube_colouring", str(exc))
    emit({"N": a.N, "cube_points": res.cube_size, "independent": len(res.independent),
          "translations": res.translations, "weight": str(res.weight),
          "weight_decimal": float(res.weight), "bound": str(res.bound),
          "regular": res.gamma.is_regular_colouring(G)})
    return 0


def cmd_certify(a) -> int:
    G = load_graph(a.graph)
    t = Fraction(a.target)
    cert = certify.certify_chi_gf(G, t, epsilon=a.epsilon)
    if a.witness and cert.witness is not None:
        certify.write_witness(cert.witness, t, a.witness)
    report = cert.report()
    if not a.full_log:
        report.pop("sharp_set", None)
    if a.report:
        Path(a.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
    emit(report)
    if not cert.verdict:
        raise VerificationFailure(f"no certificate for chi_gf >= {t}")
    return 0


def cmd_witness_check(a) -> int:
    G = load_graph(a.graph)
    t, y = certify.read_witness(a.witness)
    if a.target is not None:
        t = Fraction(a.target)
    cs = congr.build_constraints(G)
    try:
        ok = certify.check_witness(cs, y, t)
    except ValueError as exc:
        raise ComputationError("witness", str(exc))
    if not ok:
        raise VerificationFailure(f"witness does not prove chi_gf >= {t}")
    print(f"valid witness: chi_gf >= {t}")
    return 0


def _search_config(a) -> search.SearchConfig:
    cfg = RunConfig.from_args(a)
    return search.SearchConfig(beam_width=cfg.beam_width, tolerance=cfg.value_tol,
                               mode=cfg.mode, workers=cfg.workers, **cfg.stop)


def cmd_search(a) -> int:
    if a.action == "greedy":
        scorer = search.Scorer("exact" if a.exact else "numeric", a.workers)
        final, steps = search.greedy_search(
            udgraph.read_points(resolve_graph_path(a.start)), a.threshold,
            max_steps=a.max_iterations, target=a.target, scorer=scorer)
        emit({"steps": [s.__dict__ for s in steps], "final_size": len(final),
              "final_value": steps[-1].value})
        if a.output:
            udgraph.write_points(final, a.output)
        return 0
    if a.action == "descendants":
        scorer = search.Scorer("exact" if a.exact else "numeric", a.workers)
        rep = search.descendants(udgraph.read_points(resolve_graph_path(a.start)),
                                 grandchildren=a.grandchildren, seed=a.seed, scorer=scorer)
        summary = {k: {"count": len(v),
                       "min": min((x for x in v.values() if x is not None), default=None),
                       "max": max((x for x in v.values() if x is not None), default=None)}
                   for k, v in rep.checked.items()}
        emit(summary)
        return 0
    cfg = _search_config(a)
    state = None
    scorer = search.Scorer(cfg.mode, cfg.workers)
    if a.resume:
        state, scorer = search.read_checkpoint(a.resume, cfg.mode)
    start = udgraph.read_points(resolve_graph_path(a.start))

    def checkpoint(st):
        if a.checkpoint:
            search.write_checkpoint(search.SearchResult(st, scorer.cache), a.checkpoint)

    res = search.beam_search(start, cfg, scorer=scorer, state=state, on_iteration=checkpoint)
    if a.log:
        search.write_log_csv(res.state.log, a.log)
    if a.action == "figure2":
        out = a.output or "-"
        if out == "-":
            print("n,best_chi_gf")
            for n, v in res.best.items():
                print(f"{n},{v:.12f}")
        else:
            search.write_figure2_csv(res.best, out)
    else:
        emit({"stop_reason": res.state.stop_reason, "iterations": res.state.iteration,
              "best": {n: f"{v:.12f}" for n, v in res.best.items()}})
        if a.output:
            search.write_checkpoint(res, a.output)
    return 0


# -- parser -----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gfcolour", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="group", required=True)

    def graph_arg(sp):
        sp.add_argument("graph", help="graph file, or a bundled name: m7, g27")

    g = sub.add_parser("graph", help="graph summaries")
    gs = g.add_subparsers(dest="action", required=True)
    sp = gs.add_parser("info")
    graph_arg(sp)
    sp.set_defaults(func=cmd_graph_info)

    g = sub.add_parser("indep", help="independent sets")
    gs = g.add_subparsers(dest="action", required=True)
    sp = gs.add_parser("count")
    graph_arg(sp)
    sp.add_argument("--with-empty", action="store_true", help="count the empty set too")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_indep)
    sp = gs.add_parser("enumerate")
    graph_arg(sp)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_indep)

    sp = sub.add_parser("alpha", help="independence number and ratio")
    graph_arg(sp)
    sp.set_defaults(func=cmd_alpha)

    sp = sub.add_parser("hall", help="Hall ratio (exhaustive)")
    graph_arg(sp)
    sp.add_argument("--cap", type=int, default=20)
    sp.set_defaults(func=cmd_hall)

    g = sub.add_parser("congr", help="congruence classes and constraint export")
    gs = g.add_subparsers(dest="action", required=True)
    sp = gs.add_parser("classes")
    graph_arg(sp)
    sp.set_defaults(func=cmd_congr)
    sp = gs.add_parser("constraints")
    graph_arg(sp)
    sp.add_argument("-o", "--output")
    sp.add_argument("--include-empty", action="store_true")
    sp.set_defaults(func=cmd_congr)

    g = sub.add_parser("lp", help="chi_f / chi_gf linear programs")
    gs = g.add_subparsers(dest="action", required=True)
    for name in ("chif", "chigf"):
        sp = gs.add_parser(name)
        graph_arg(sp)
        m = sp.add_mutually_exclusive_group()
        m.add_argument("--exact", action="store_true", default=True)
        m.add_argument("--numeric", action="store_true")
        sp.add_argument("--backend", choices=["highs", "external"], default="highs")
        sp.add_argument("--feas-tol", type=float, default=lp.FEAS_TOL)
        sp.add_argument("--cap", type=int, default=lp.DEFAULT_EXACT_CAP)
        sp.add_argument("--json", action="store_true")
        sp.set_defaults(func=cmd_lp)
    sp = gs.add_parser("export")
    graph_arg(sp)
    sp.add_argument("--model", choices=["chif", "chigf"], default="chigf")
    sp.add_argument("--include-empty", action="store_true")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_lp)

    g = sub.add_parser("colouring", help="integer colourings")
    gs = g.add_subparsers(dest="action", required=True)
    sp = gs.add_parser("verify")
    graph_arg(sp)
    sp.add_argument("colouring", help="colour file (one integer per vertex, file order), "
                                      "or the bundled name g27-colouring")
    sp.add_argument("--colours", type=int, default=None, help="number of colours allowed")
    sp.set_defaults(func=cmd_colouring_verify)

    sp = sub.add_parser("cube-colour", help="fractional colouring from a coefficient cube")
    graph_arg(sp)
    sp.add_argument("-N", type=int, default=1)
    sp.add_argument("--cap", type=int, default=81)
    sp.set_defaults(func=cmd_cube)

    sp = sub.add_parser("certify", help="exact lower-bound certificate for chi_gf")
    graph_arg(sp)
    sp.add_argument("target", help="rational target t, e.g. 7/2")
    sp.add_argument("--epsilon", type=float, default=certify.DEFAULT_EPSILON)
    sp.add_argument("--witness", help="write the witness file here")
    sp.add_argument("--report", help="write the certificate report (JSON) here")
    sp.add_argument("--full-log", action="store_true", help="include the sharp set indices")
    sp.set_defaults(func=cmd_certify)

    g = sub.add_parser("witness", help="witness files")
    gs = g.add_subparsers(dest="action", required=True)
    sp = gs.add_parser("check")
    graph_arg(sp)
    sp.add_argument("witness")
    sp.add_argument("--target", help="override the target stored in the file")
    sp.set_defaults(func=cmd_witness_check)

    g = sub.add_parser("search", help="beam search, greedy endgame, descendant checks")
    gs = g.add_subparsers(dest="action", required=True)
    for name in ("run", "figure2", "greedy", "descendants"):
        sp = gs.add_parser(name)
        sp.add_argument("start", nargs="?", default="m7")
        sp.add_argument("--exact", action="store_true", help="score with the exact simplex")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="scoring processes (default: all CPUs)")
        sp.add_argument("--target", type=float)
        sp.add_argument("--max-iterations", type=int)
        sp.add_argument("-o", "--output")
        if name in ("run", "figure2"):
            sp.add_argument("--beam-width", type=int, default=100, help="<= 0 for unbounded")
            sp.add_argument("--max-size", type=int)
            sp.add_argument("--time-limit", type=float)
            sp.add_argument("--value-tol", type=float, default=lp.VALUE_TOL)
            sp.add_argument("--log", help="CSV run log")
            sp.add_argument("--checkpoint", help="rewrite this checkpoint after every iteration")
            sp.add_argument("--resume", help="checkpoint to resume from")
        if name == "greedy":
            sp.add_argument("--threshold", type=float, default=0.004)
        if name == "descendants":
            sp.add_argument("--grandchildren", type=int, default=0)
            sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(func=cmd_search)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).info("config %s", asdict(RunConfig.from_args(a)))
    try:
        return a.func(a)
    except ComputationError as exc:
        print(f"error in stage {exc.stage}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except VerificationFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VERIFY
    except (FileNotFoundError, udgraph.DuplicatePointError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
