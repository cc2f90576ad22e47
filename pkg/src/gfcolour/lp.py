"""Linear programs for the fractional and geometric fractional chromatic numbers."""

from __future__ import annotations

import hashlib
import logging
import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix

from . import highs, simplex
from .congr import ConstraintSystem, build_constraints, congruence_classes, spanning_pairs
from .field import MoserPoint
from .udgraph import UnitGraph, VertexSet, bits, enumerate_independent_sets

log = logging.getLogger(__name__)

EXACT = "exact-rational"
FLOAT = "floating"
NUMERIC_FAILURE = "numeric-failure"

DEFAULT_EXACT_CAP = 50_000
FEAS_TOL = 1e-9
VALUE_TOL = 1e-6

SOLVER_ENV = "GFCOLOUR_LP_SOLVER"


class CapExceeded(ValueError):
    pass


class BackendError(RuntimeError):
    pass


@dataclass
class LPModel:
    """minimize sum(x) s.t. A x (sense) b, x >= 0.

    ``A`` holds small integer coefficients; ``senses`` is ``"="`` or ``">="``
    per row.  ``columns`` records the independent set behind each variable.
    """

    A: csr_matrix
    senses: list[str]
    rhs: list[Fraction]
    columns: list[VertexSet] = field(default_factory=list)
    name: str = "model"

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def row(self, i: int) -> dict[int, int]:
        lo, hi = self.A.indptr[i], self.A.indptr[i + 1]
        return {int(j): int(v) for j, v in zip(self.A.indices[lo:hi], self.A.data[lo:hi])}

    def canonical_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n_cols} {self.n_rows}\n".encode())
        for i in range(self.n_rows):
            row = sorted(self.row(i).items())
            h.update((" ".join(f"{j}:{v}" for j, v in row)
                      + f" {self.senses[i]} {self.rhs[i]}\n").encode())
        return h.hexdigest()


@dataclass
class Solution:
    status: str
    x: list
    y: list  # one dual per row; optimum == sum(b_i y_i)
    objective: Fraction | float | None
    mode: str
    residuals: dict = field(default_factory=dict)

    @property
    def value(self) -> float | None:
        return None if self.objective is None else float(self.objective)


# -- model builders -----------------------------------------------------------------

def chi_f_model(G: UnitGraph, columns: list[VertexSet] | None = None,
                regular: bool = False) -> LPModel:
    """Covering LP: every vertex is covered with total weight >= 1 (== 1 if ``regular``)."""
    if columns is None:
        columns = enumerate_independent_sets(G)
    indptr, indices = [0], []
    for v in range(G.n):
        cols = [j for j, s in enumerate(columns) if s >> v & 1]
        indices.extend(cols)
        indptr.append(len(indices))
    A = csr_matrix((np.ones(len(indices)), np.array(indices, dtype=np.int64), np.array(indptr)),
                   shape=(G.n, len(columns)))
    sense = "=" if regular else ">="
    return LPModel(A, [sense] * G.n, [Fraction(1)] * G.n, list(columns),
                   name="chi_f" + ("_regular" if regular else ""))


def chi_gf_model(G: UnitGraph | None = None, system: ConstraintSystem | None = None,
                 include_empty: bool = False) -> LPModel:
    """<e, x> = 1 and C x = 0 over the independent-set columns."""
    if system is None:
        system = build_constraints(G, include_empty=include_empty)
    A = system.matrix(with_e=True)
    rhs = [Fraction(1)] + [Fraction(0)] * system.n_rows
    return LPModel(A, ["="] * (1 + system.n_rows), rhs, list(system.columns), name="chi_gf")


# -- solvers --------------------------------------------------------------------------

def solve_exact(model: LPModel, cap: int = DEFAULT_EXACT_CAP, warm: bool = True) -> Solution:
    """Exact optimum and duals over the rationals.

    With ``warm`` the floating-point optimum is first rounded to nearby
    small-denominator rationals; if the rounded pair is primal and dual
    feasible with equal objectives it is an exact optimum and is returned.
    Otherwise (or with ``warm=False``) the rational simplex runs, seeded
    with the float support when available.
    """
    if model.n_cols > cap:
        raise CapExceeded(f"{model.n_cols} columns exceeds exact-solver cap {cap}")
    rows = [model.row(i) for i in range(model.n_rows)]
    start = None
    if warm:
        approx = _try_numeric(model)
        if approx is not None:
            exact = reconstruct_optimum(model, approx.x, approx.y, rows)
            if exact is not None:
                x, y = exact
                return Solution(simplex.OPTIMAL, x, y, sum(x, Fraction(0)), EXACT,
                                {"method": "reconstruction", "pivots": 0})
            xs = np.asarray(approx.x, dtype=float)
            start = [int(j) for j in np.argsort(-xs, kind="stable") if xs[j] > FEAS_TOL]
    res = simplex.solve([1] * model.n_cols, rows, model.senses, model.rhs, model.n_cols,
                        start=start)
    return Solution(res.status, res.x, res.y, res.objective, EXACT,
                    {"method": "simplex", "pivots": res.pivots})


def _try_numeric(model: LPModel) -> Solution | None:
    try:
        sol = solve_numeric(model)
    except Exception:  # the rational simplex does not need it
        return None
    return sol if sol.status == simplex.OPTIMAL else None


def _round(values, denominator: int) -> list[Fraction]:
    return [Fraction(v).limit_denominator(denominator) for v in values]


def reconstruct_optimum(model: LPModel, x_float, y_float, rows=None,
                        denominators=(10**3, 10**6)
                        ) -> tuple[list[Fraction], list[Fraction]] | None:
    """Round a float primal/dual pair to rationals and verify optimality exactly.

    Returns ``(x, y)`` only if x >= 0 satisfies every row, y is dual
    feasible (1 - A^T y >= 0, y_i >= 0 on ">=" rows) and sum(x) == b.y;
    those three facts together prove both are optimal.
    """
    if rows is None:
        rows = [model.row(i) for i in range(model.n_rows)]
    rhs = [Fraction(b) for b in model.rhs]
    for den in denominators:
        x = _round(x_float, den)
        y = _round(y_float, den)
        if any(v < 0 for v in x):
            continue
        if any(y[i] < 0 for i, s in enumerate(model.senses) if s == ">="):
            continue
        ok = True
        reduced = [Fraction(1)] * model.n_cols
        for i, (row, sense) in enumerate(zip(rows, model.senses)):
            lhs = sum((v * x[j] for j, v in row.items()), Fraction(0))
            if (lhs != rhs[i]) if sense == "=" else (lhs < rhs[i]):
                ok = False
                break
            if y[i]:
                for j, v in row.items():
                    reduced[j] -= v * y[i]
        if not ok or any(r < 0 for r in reduced):
            continue
        if sum(x, Fraction(0)) != sum((b * v for b, v in zip(rhs, y)), Fraction(0)):
            continue
        return x, y
    return None


def residual_report(model: LPModel, x: np.ndarray, y: np.ndarray) -> dict:
    b = np.array([float(r) for r in model.rhs])
    Ax = model.A @ x
    viol = np.where(np.array(model.senses) == "=", np.abs(Ax - b), np.maximum(b - Ax, 0))
    reduced = 1.0 - model.A.T @ y
    ge = np.array(model.senses) == ">="
    return {
        "primal_residual": float(viol.max(initial=0.0)),
        "bound_violation": float(max(0.0, -x.min(initial=0.0))),
        "dual_residual": float(max(0.0, -reduced.min(initial=0.0))),
        "dual_sign_violation": float(max(0.0, -y[ge].min(initial=0.0))) if ge.any() else 0.0,
        "gap": float(abs(x.sum() - b @ y)),
    }


def solve_numeric(model: LPModel, backend: str = "highs", feas_tol: float = FEAS_TOL,
                  solver: str = "simplex", time_limit: float | None = None,
                  verbose: bool = False) -> Solution:
    """Floating-point solve.  ``backend`` is ``"highs"`` (in process) or ``"external"``."""
    if backend == "external":
        return _solve_external(model, feas_tol)
    if backend != "highs":
        raise BackendError(f"unknown backend {backend!r}")
    b = np.array([float(r) for r in model.rhs])
    upper = np.where(np.array(model.senses) == "=", b, highs.INF)
    res = highs.solve(np.ones(model.n_cols), model.A, b, upper,
                      np.zeros(model.n_cols), np.full(model.n_cols, highs.INF),
                      feas_tol=feas_tol, solver=solver, time_limit=time_limit, verbose=verbose)
    if res.status in (simplex.INFEASIBLE, simplex.UNBOUNDED):
        return Solution(res.status, [], [], None, FLOAT)
    if res.status != simplex.OPTIMAL:
        return Solution(NUMERIC_FAILURE, [], [], None, FLOAT, {"message": res.status})
    report = residual_report(model, res.x, res.row_dual)
    report["iterations"] = res.iterations
    status = simplex.OPTIMAL
    if report["primal_residual"] > 10 * feas_tol or report["bound_violation"] > 10 * feas_tol:
        status = NUMERIC_FAILURE
    return Solution(status, res.x.tolist(), res.row_dual.tolist(), res.objective, FLOAT, report)


def _solve_external(model: LPModel, feas_tol: float) -> Solution:
    template = os.environ.get(SOLVER_ENV)
    if not template:
        raise BackendError(f"external backend needs ${SOLVER_ENV}, e.g. "
                           "'highs --model_file {lp} --solution_file {sol}'")
    with tempfile.TemporaryDirectory() as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        export_lp(model, lp_path)
        cmd = template.format(lp=shlex.quote(str(lp_path)), sol=shlex.quote(str(sol_path)))
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
        if proc.returncode != 0 or not sol_path.exists():
            raise BackendError(f"external solver failed: {proc.stderr.strip()[:500]}")
        x = read_solution(sol_path, model.n_cols)
    xs = np.array(x)
    report = residual_report(model, xs, np.zeros(model.n_rows))
    status = simplex.OPTIMAL if report["primal_residual"] <= 10 * feas_tol else NUMERIC_FAILURE
    return Solution(status, x, [], float(xs.sum()), FLOAT, report)


# -- chromatic numbers ---------------------------------------------------------------

def _solve(model: LPModel, mode: str, cap: int, **kw) -> Solution:
    if mode == "exact":
        return solve_exact(model, cap=cap)
    if mode == "numeric":
        return solve_numeric(model, **kw)
    raise ValueError(f"mode must be 'exact' or 'numeric', not {mode!r}")


def chi_f(G: UnitGraph, mode: str = "exact", cap: int = DEFAULT_EXACT_CAP, **kw) -> Solution:
    return _solve(chi_f_model(G), mode, cap, **kw)


def chi_gf(G: UnitGraph, mode: str = "exact", cap: int = DEFAULT_EXACT_CAP,
           system: ConstraintSystem | None = None, **kw) -> Solution:
    return _solve(chi_gf_model(G, system=system), mode, cap, **kw)


# -- LP text format ---------------------------------------------------------------------

def _term(coef: int, j: int, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    body = f"x{j}" if mag == 1 else f"{mag} x{j}"
    return f"{sign} {body}" if sign else body


def _lp_lines(model: LPModel):
    yield f"\\ {model.name}: {model.n_cols} variables, {model.n_rows} constraints\n"
    yield "Minimize\n"
    yield " obj: " + " ".join(_term(1, j, j == 0) for j in range(model.n_cols)) + "\n"
    yield "Subject To\n"
    for i in range(model.n_rows):
        row = sorted(model.row(i).items())
        rhs = model.rhs[i]
        if rhs.denominator != 1:
            raise ValueError("LP text export needs integer right-hand sides")
        lhs = " ".join(_term(v, j, k == 0) for k, (j, v) in enumerate(row)) or "0 x0"
        yield f" c{i}: {lhs} {model.senses[i]} {rhs.numerator}\n"
    yield "Bounds\n"
    for j in range(model.n_cols):
        yield f" x{j} >= 0\n"
    yield "End\n"


def format_lp(model: LPModel) -> str:
    return "".join(_lp_lines(model))


def export_lp(model: LPModel, destination) -> None:
    if hasattr(destination, "write"):
        destination.writelines(_lp_lines(model))
        return
    with open(destination, "w", encoding="utf-8") as fh:
        fh.writelines(_lp_lines(model))


_TERM = re.compile(r"([+-])?\s*(\d+)?\s*x(\d+)")


def parse_lp(text: str) -> LPModel:
    """Read back the subset of LP format written by :func:`export_lp`."""
    section = None
    n_cols = 0
    indptr, indices, data = [0], [], []
    senses, rhs = [], []
    name = "model"
    for line in text.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("\\"):
            m = re.match(r"\\ (\S+):", s)
            if m:
                name = m.group(1)
            continue
        low = s.lower()
        if low in ("minimize", "subject to", "bounds", "end"):
            section = low
            continue
        if section == "minimize":
            n_cols = len(_TERM.findall(s.split(":", 1)[1]))
        elif section == "subject to":
            body = s.split(":", 1)[1]
            m = re.match(r"(.*?)\s*(>=|<=|=)\s*(-?\d+)\s*$", body)
            if not m:
                raise ValueError(f"cannot parse constraint {s!r}")
            terms = _TERM.findall(m.group(1))
            for sign, mag, j in terms:
                coef = int(mag) if mag else 1
                if coef == 0:
                    continue
                indices.append(int(j))
                data.append(-coef if sign == "-" else coef)
            indptr.append(len(indices))
            senses.append(m.group(2))
            rhs.append(Fraction(int(m.group(3))))
    A = csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.int64),
                    np.array(indptr)), shape=(len(senses), n_cols))
    return LPModel(A, senses, rhs, name=name)


def read_lp(path) -> LPModel:
    return parse_lp(Path(path).read_text(encoding="utf-8"))


def read_solution(path, n_cols: int) -> list[float]:
    """Solution file: lines ``x<j> <value>``; other lines are ignored."""
    x = [0.0] * n_cols
    pat = re.compile(r"^\s*x(\d+)\s+(\S+)")
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        m = pat.match(line)
        if m and int(m.group(1)) < n_cols:
            x[int(m.group(1))] = float(m.group(2))
    return x


def write_solution(x: Sequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for j, v in enumerate(x):
            fh.write(f"x{j} {v}\n")


# -- integer colourings -----------------------------------------------------------------

@dataclass
class ColouringCheck:
    proper: bool
    e_value: int
    violated_pairs: list[tuple[VertexSet, VertexSet]]
    n_colours: int

    @property
    def valid(self) -> bool:
        return self.proper and self.e_value == 1 and not self.violated_pairs


def colour_classes(G: UnitGraph, colouring: Sequence[int] | Mapping[MoserPoint, int],
                   n_colours: int | None = None) -> dict[int, VertexSet]:
    if isinstance(colouring, Mapping):
        colours = [colouring[p] for p in G.vertices]
    else:
        colours = list(colouring)
    if len(colours) != G.n:
        raise ValueError(f"colouring has {len(colours)} entries for {G.n} vertices")
    top = n_colours if n_colours is not None else max(colours, default=0)
    classes: dict[int, VertexSet] = {}
    for v, c in enumerate(colours):
        if c < 1 or c > top:
            raise ValueError(f"colour index {c} out of range 1..{top}")
        classes[c] = classes.get(c, 0) | (1 << v)
    return classes


def check_colouring(G: UnitGraph, colouring, n_colours: int | None = None,
                    pairs: list[tuple[VertexSet, VertexSet]] | None = None) -> ColouringCheck:
    """Test the 0/1 weight on the colour classes against <e,x> = 1 and C x = 0.

    Row (Y, Y') applied to that weight equals #{classes containing Y} minus
    #{classes containing Y'}, so only the spanning pairs are needed.
    """
    classes = list(colour_classes(G, colouring, n_colours).values())
    proper = all(G.is_independent(s) for s in classes)
    e_value = sum(1 for s in classes if s & 1)
    if pairs is None:
        pairs = spanning_pairs(congruence_classes(enumerate_independent_sets(G), G))
    bad = []
    for Y, Z in pairs:
        if sum(1 for s in classes if s & Y == Y) != sum(1 for s in classes if s & Z == Z):
            bad.append((Y, Z))
    return ColouringCheck(proper, e_value, bad, len(classes))


def verify_colouring_in_gfc(G: UnitGraph, colouring, n_colours: int | None = None,
                            pairs=None) -> bool:
    return check_colouring(G, colouring, n_colours, pairs).valid


def colouring_vector(G: UnitGraph, colouring, columns: Sequence[VertexSet],
                     n_colours: int | None = None) -> list[int]:
    """0/1 column vector of the colour classes."""
    pos = {s: j for j, s in enumerate(columns)}
    x = [0] * len(columns)
    for s in colour_classes(G, colouring, n_colours).values():
        if s not in pos:
            raise ValueError(f"colour class {bits(s)} is not an independent-set column")
        x[pos[s]] += 1
    return x
