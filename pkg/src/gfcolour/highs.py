"""Thin wrapper over highspy for large sparse LPs.

Passing the matrix column-wise straight into HiGHS avoids the extra copies a
generic front end makes, which matters for the 27-vertex model (tens of
millions of nonzeros).
"""

from __future__ import annotations

from dataclasses import dataclass

import highspy
import numpy as np
from scipy.sparse import csc_matrix

INF = highspy.kHighsInf


@dataclass
class HighsResult:
    status: str  # optimal | infeasible | unbounded | <other model status>
    x: np.ndarray
    row_dual: np.ndarray
    objective: float | None
    iterations: int


def solve(cost, A: csc_matrix, row_lower, row_upper, col_lower, col_upper,
          feas_tol: float = 1e-9, solver: str = "simplex", simplex_strategy: int = 1,
          time_limit: float | None = None, threads: int | None = None,
          verbose: bool = False) -> HighsResult:
    """minimize cost.x s.t. row_lower <= A x <= row_upper, col bounds.

    ``simplex_strategy`` follows HiGHS numbering (1 = dual, 4 = primal).
    Row duals follow the convention reduced_cost = cost - A^T row_dual.
    """
    A = csc_matrix(A)
    n_rows, n_cols = A.shape
    lp = highspy.HighsLp()
    lp.num_col_ = n_cols
    lp.num_row_ = n_rows
    lp.col_cost_ = np.asarray(cost, dtype=np.float64)
    lp.col_lower_ = np.asarray(col_lower, dtype=np.float64)
    lp.col_upper_ = np.asarray(col_upper, dtype=np.float64)
    lp.row_lower_ = np.asarray(row_lower, dtype=np.float64)
    lp.row_upper_ = np.asarray(row_upper, dtype=np.float64)
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = A.indptr.astype(np.int32)
    lp.a_matrix_.index_ = A.indices.astype(np.int32)
    lp.a_matrix_.value_ = A.data.astype(np.float64)
    del A

    h = highspy.Highs()
    h.setOptionValue("output_flag", verbose)
    h.setOptionValue("solver", solver)
    h.setOptionValue("simplex_strategy", simplex_strategy)
    h.setOptionValue("primal_feasibility_tolerance", feas_tol)
    h.setOptionValue("dual_feasibility_tolerance", feas_tol)
    if time_limit is not None:
        h.setOptionValue("time_limit", float(time_limit))
    if threads is not None:
        h.setOptionValue("threads", int(threads))
    h.passModel(lp)
    del lp
    h.run()
    ms = h.getModelStatus()
    info = h.getInfo()
    iters = int(info.simplex_iteration_count)
    if ms == highspy.HighsModelStatus.kOptimal:
        sol = h.getSolution()
        return HighsResult("optimal", np.array(sol.col_value), np.array(sol.row_dual),
                           float(info.objective_function_value), iters)
    if ms == highspy.HighsModelStatus.kInfeasible:
        return HighsResult("infeasible", np.zeros(0), np.zeros(0), None, iters)
    if ms in (highspy.HighsModelStatus.kUnbounded, highspy.HighsModelStatus.kUnboundedOrInfeasible):
        # presolve may not separate the two; rerun without it to decide
        h.setOptionValue("presolve", "off")
        h.run()
        ms = h.getModelStatus()
        if ms == highspy.HighsModelStatus.kInfeasible:
            return HighsResult("infeasible", np.zeros(0), np.zeros(0), None, iters)
        return HighsResult("unbounded", np.zeros(0), np.zeros(0), None, iters)
    return HighsResult(h.modelStatusToString(ms), np.zeros(0), np.zeros(0), None, iters)

