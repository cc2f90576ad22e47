"""Exact rational lower-bound certificates for the gfc linear program.

A witness is a rational vector y, one entry per congruence row of C, with

    y^T C - t e + 1 >= 0      (componentwise over all columns),

which by weak duality proves chi_gf >= t.  Witnesses are produced by
solving a min-sup-norm dual numerically, reading the floats as exact binary
fractions, pinning the (nearly) tight columns as equalities and projecting
orthogonally onto that affine subspace in exact arithmetic.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import highs
from .congr import ConstraintSystem, build_constraints
from .udgraph import UnitGraph, format_points

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-12


class InconsistentSystem(ValueError):
    pass


class NumericFailure(RuntimeError):
    pass


def graph_hash(G: UnitGraph) -> str:
    return hashlib.sha256(format_points(G.vertices).encode()).hexdigest()


def _common_denominator(values: Sequence[Fraction]) -> int:
    D = 1
    for v in values:
        d = v.denominator
        if D % d:
            D = D * d // math.gcd(D, d)
    return D


def exact_slacks(system: ConstraintSystem, y: Sequence, t) -> list[Fraction]:
    """(y^T C - t e + 1)_j for every column j, exactly."""
    if len(y) != system.n_rows:
        raise ValueError(f"witness has {len(y)} entries, system has {system.n_rows} rows")
    ys = [Fraction(v) for v in y]
    t = Fraction(t)
    D = _common_denominator(ys + [t])
    acc = [D] * system.n_cols  # the "+1", scaled
    te = (t * D).numerator
    for j in system.e.tolist():
        acc[j] -= te
    for Y, p, m in zip(ys, system.plus, system.minus):
        if not Y:
            continue
        v = (Y * D).numerator
        for j in p.tolist():
            acc[j] += v
        for j in m.tolist():
            acc[j] -= v
    return [Fraction(a, D) for a in acc]


def check_witness(system: ConstraintSystem | UnitGraph, y: Sequence, t) -> bool:
    """True iff y^T C - t e + 1 >= 0 holds exactly, proving chi_gf >= t."""
    if isinstance(system, UnitGraph):
        system = build_constraints(system)
    return all(s >= 0 for s in exact_slacks(system, y, t))


def float_slacks(system: ConstraintSystem, y: np.ndarray, t: float) -> np.ndarray:
    C = system.matrix()
    return C.T @ np.asarray(y, dtype=float) - t * system.e_dense() + 1.0


def witness_from_duals(duals: Sequence) -> list[Fraction]:
    """LP duals (z_0, z_1..z_m) of the chi_gf model give y = -(z_1..z_m)."""
    return [-Fraction(z) for z in duals[1:]]


# -- max-margin dual -----------------------------------------------------------------

def max_margin_dual(system: ConstraintSystem, t: float, feas_tol: float = 1e-9,
                    solver: str = "simplex", time_limit: float | None = None,
                    verbose: bool = False) -> np.ndarray:
    """Point of W = {y : C^T y >= t e - 1} minimising max |y_r|.

    Variables are (y_1..y_m, s); rows are C^T y >= t e - 1 and
    -s <= y_r <= s.  Raises :class:`NumericFailure` when the solver reports W
    empty (t above the optimum) or fails.
    """
    from scipy.sparse import bmat, csr_matrix, identity

    m, n = system.n_rows, system.n_cols
    CT = system.matrix().T
    if m:
        I = identity(m, format="csr")
        ones = csr_matrix(np.ones((m, 1)))
        A = bmat([[CT, csr_matrix((n, 1))], [I, -ones], [I, ones]], format="csc")
    else:
        A = csr_matrix((n, 1)).tocsc()
    del CT
    lower = np.concatenate([t * system.e_dense() - 1.0, np.full(m, -highs.INF), np.zeros(m)])
    upper = np.concatenate([np.full(n, highs.INF), np.zeros(m), np.full(m, highs.INF)])
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    col_lo = np.concatenate([np.full(m, -highs.INF), [0.0]])
    col_hi = np.full(m + 1, highs.INF)
    res = highs.solve(cost, A, lower, upper, col_lo, col_hi, feas_tol=feas_tol, solver=solver,
                      time_limit=time_limit, verbose=verbose)
    if res.status == "infeasible":
        raise NumericFailure(f"dual region empty at target {t}")
    if res.status != "optimal":
        raise NumericFailure(f"max-margin dual failed: {res.status}")
    return np.asarray(res.x[:m])


def rationalize(y: Sequence[float]) -> list[Fraction]:
    """Each double read as the exact binary fraction it denotes."""
    return [Fraction(float(v)) for v in y]


def sharp_set(system: ConstraintSystem, y: Sequence, t, epsilon: float = DEFAULT_EPSILON
              ) -> list[int]:
    """Columns whose slack is at most ``epsilon`` (violated ones included).

    Slacks are computed exactly when ``y`` holds Fractions, otherwise in
    floating point.
    """
    if len(y) and isinstance(y[0], Fraction):
        eps = Fraction(epsilon)
        return [j for j, s in enumerate(exact_slacks(system, y, t)) if s <= eps]
    s = float_slacks(system, np.asarray(y, dtype=float), float(t))
    return np.flatnonzero(s <= epsilon).tolist()


# -- exact projection -------------------------------------------------------------------

def _column_vectors(system: ConstraintSystem, cols: Sequence[int]) -> list[dict[int, int]]:
    """Selected columns of C as sparse {row: +-1} maps."""
    cols_arr = np.asarray(cols, dtype=np.int64)
    where = {j: k for k, j in enumerate(cols)}
    out: list[dict[int, int]] = [{} for _ in cols]
    for r, (p, m) in enumerate(zip(system.plus, system.minus)):
        for arr, sign in ((p, 1), (m, -1)):
            if len(arr) == 0:
                continue
            hit = arr[np.isin(arr, cols_arr, assume_unique=True)]
            for j in hit.tolist():
                out[where[j]][r] = sign
    return out


def project_to_witness(system: ConstraintSystem, y_bar: Sequence, sharp: Sequence[int],
                       t) -> list[Fraction]:
    """Exact orthogonal projection of y_bar onto {y : (y^T C)_j = t e_j - 1, j in sharp}.

    Uses the normal equations on the Gram matrix of the selected columns;
    dependent columns are detected as zero pivots (the Gram matrix is
    positive semidefinite) and must be consistent.
    """
    t = Fraction(t)
    yb = [Fraction(v) for v in y_bar]
    e_set = set(system.e.tolist())
    cols = list(sharp)
    vecs = _column_vectors(system, cols)
    b = [t * (1 if j in e_set else 0) - 1 for j in cols]
    resid = [sum((yb[r] * s for r, s in v.items()), Fraction(0)) - bj for v, bj in zip(vecs, b)]
    k = len(cols)
    gram = [[Fraction(0)] * k for _ in range(k)]
    for a in range(k):
        va = vecs[a]
        for c in range(a, k):
            vc = vecs[c]
            small, big = (va, vc) if len(va) <= len(vc) else (vc, va)
            g = sum(s * big[r] for r, s in small.items() if r in big)
            gram[a][c] = gram[c][a] = Fraction(g)

    lam = _solve_psd(gram, resid)
    y = list(yb)
    for coef, v in zip(lam, vecs):
        if coef:
            for r, s in v.items():
                y[r] -= coef * s
    for v, bj in zip(vecs, b):
        if sum((y[r] * s for r, s in v.items()), Fraction(0)) != bj:
            raise InconsistentSystem("projection does not satisfy the pinned equalities")
    return y


def _solve_psd(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """One solution of M x = rhs for symmetric PSD M; zero on dependent indices."""
    n = len(M)
    A = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    pivots: list[int] = []
    for i in range(n):
        # eliminate earlier pivots from row i
        row = A[i]
        for p in pivots:
            f = row[p]
            if f:
                prow = A[p]
                for c in range(p, n + 1):
                    if prow[c]:
                        row[c] -= f * prow[c]
        if row[i] == 0:
            if any(row[c] for c in range(i, n)):
                raise AssertionError("Gram matrix is not positive semidefinite")
            if row[n] != 0:
                raise InconsistentSystem("pinned equalities are inconsistent")
            continue
        piv = row[i]
        for c in range(i, n + 1):
            row[c] /= piv
        pivots.append(i)
    # A is now unit upper-triangular on the pivot set; back substitute
    x = [Fraction(0)] * n
    for i in reversed(pivots):
        row = A[i]
        x[i] = row[n] - sum((row[c] * x[c] for c in pivots if c > i and row[c]), Fraction(0))
    return x


# -- pipeline ---------------------------------------------------------------------------

@dataclass
class Certificate:
    graph_hash: str
    target: Fraction
    witness: list[Fraction] | None
    verdict: bool
    log: dict = field(default_factory=dict)

    def report(self) -> dict:
        out = {
            "graph_hash": self.graph_hash,
            "target": str(self.target),
            "verdict": self.verdict,
            "witness_entries": None if self.witness is None else len(self.witness),
        }
        out.update(self.log)
        return out

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2, sort_keys=True)


def certify_chi_gf(G: UnitGraph, t, epsilon: float = DEFAULT_EPSILON,
                   system: ConstraintSystem | None = None, solver: str = "simplex",
                   verbose: bool = False) -> Certificate:
    """max-margin dual -> rationalize -> sharp set -> exact projection -> exact check."""
    t = Fraction(t)
    if system is None:
        system = build_constraints(G)
    cert = Certificate(graph_hash(G), t, None, False,
                       {"epsilon": epsilon, "rows": system.n_rows, "cols": system.n_cols})
    try:
        y_bar = max_margin_dual(system, float(t), solver=solver, verbose=verbose)
    except NumericFailure as exc:
        cert.log.update(stage="max_margin_dual", error=str(exc))
        return cert
    fl = float_slacks(system, y_bar, float(t))
    cert.log["dual_source"] = f"HiGHS {solver}, min sup-norm over W"
    cert.log["dual_sup_norm"] = float(np.abs(y_bar).max(initial=0.0))
    cert.log["dual_min_slack"] = float(fl.min(initial=np.inf))
    y_rat = rationalize(y_bar)
    sharp = sharp_set(system, y_rat, t, epsilon)
    cert.log["sharp_set_size"] = len(sharp)
    cert.log["sharp_set"] = sharp
    outside = np.delete(fl, sharp) if sharp else fl
    cert.log["next_smallest_slack"] = float(outside.min(initial=np.inf))
    try:
        y = project_to_witness(system, y_rat, sharp, t)
    except InconsistentSystem as exc:
        cert.log.update(stage="project_to_witness", error=str(exc))
        return cert
    cert.log["projection_distance_sq"] = float(sum((a - b) ** 2 for a, b in zip(y, y_rat)))
    cert.log["pinned_residual_zero"] = True
    cert.witness = y
    cert.verdict = check_witness(system, y, t)
    cert.log["stage"] = "check_witness"
    return cert


# -- witness files -------------------------------------------------------------------------

def format_witness(y: Sequence[Fraction], t) -> str:
    t = Fraction(t)
    lines = [f"target {t.numerator}/{t.denominator}"]
    lines += [f"{v.numerator}/{v.denominator}" for v in map(Fraction, y)]
    return "\n".join(lines) + "\n"


def write_witness(y: Sequence[Fraction], t, path) -> None:
    Path(path).write_text(format_witness(y, t), encoding="utf-8")


def parse_witness(text: str) -> tuple[Fraction, list[Fraction]]:
    lines = [s.strip() for s in text.splitlines() if s.strip()]
    if not lines or not lines[0].startswith("target "):
        raise ValueError("witness file must start with 'target <num>/<den>'")
    t = Fraction(lines[0].split(None, 1)[1])
    return t, [Fraction(s) for s in lines[1:]]


def read_witness(path) -> tuple[Fraction, list[Fraction]]:
    return parse_witness(Path(path).read_text(encoding="utf-8"))
