"""Two-phase primal simplex over the rationals with Bland's rule.

Works on a sparse tableau (one dict per row).  Problems have the form

    minimize c.x  subject to  A_i.x (= | >=) b_i,  x >= 0

and come back with exact primal values, exact duals (one per row, signed so
that the optimum equals b.y) and a status string.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Row = dict[int, Fraction]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class SimplexResult:
    status: str
    x: list[Fraction]
    y: list[Fraction]
    objective: Fraction | None
    pivots: int


class _Tableau:
    def __init__(self, rows: list[Row], rhs: list[Fraction], basis: list[int]) -> None:
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.obj: Row = {}
        self.objval = Fraction(0)  # negative of the current objective
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            for k in row:
                row[k] *= inv
            self.rhs[r] *= inv
        b = self.rhs[r]
        items = list(row.items())
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(c)
            if f is None:
                continue
            for k, v in items:
                nv = other.get(k, 0) - f * v
                if nv:
                    other[k] = nv
                else:
                    other.pop(k, None)
            self.rhs[i] -= f * b
        f = self.obj.get(c)
        if f is not None:
            for k, v in items:
                nv = self.obj.get(k, 0) - f * v
                if nv:
                    self.obj[k] = nv
                else:
                    self.obj.pop(k, None)
            self.objval -= f * b
        self.basis[r] = c
        self.pivots += 1

    def set_objective(self, cost: dict[int, Fraction]) -> None:
        obj: Row = {k: Fraction(v) for k, v in cost.items() if v}
        val = Fraction(0)
        for r, j in enumerate(self.basis):
            cj = cost.get(j, 0)
            if not cj:
                continue
            for k, v in self.rows[r].items():
                nv = obj.get(k, 0) - cj * v
                if nv:
                    obj[k] = nv
                else:
                    obj.pop(k, None)
            val -= cj * self.rhs[r]
        self.obj = obj
        self.objval = val

    def run(self, allowed: int) -> str:
        """Bland's rule iterations; columns >= ``allowed`` never enter."""
        while True:
            enter = min((k for k, v in self.obj.items() if v < 0 and k < allowed), default=None)
            if enter is None:
                return OPTIMAL
            best_r, best_ratio = -1, None
            for r, row in enumerate(self.rows):
                a = row.get(enter)
                if a is None or a <= 0:
                    continue
                ratio = self.rhs[r] / a
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[r] < self.basis[best_r])):
                    best_r, best_ratio = r, ratio
            if best_r < 0:
                return UNBOUNDED
            self.pivot(best_r, enter)


def solve(cost: Sequence, rows: Sequence[dict[int, int | Fraction]], senses: Sequence[str],
          rhs: Sequence, n_cols: int, start: Sequence[int] | None = None) -> SimplexResult:
    """Solve min cost.x s.t. rows (sense) rhs, x >= 0.

    ``senses`` entries are ``"="`` or ``">="``.  ``start`` lists columns
    (say the support of a floating-point optimum) to pivot into the phase-1
    basis before iterating; if that leaves the basic solution infeasible
    the solve restarts from the slack basis, so ``start`` never changes
    the answer, only the pivot count.
    """
    if start:
        res = _solve(cost, rows, senses, rhs, n_cols, start)
        if res is not None:
            return res
    return _solve(cost, rows, senses, rhs, n_cols, None)


def _solve(cost, rows, senses, rhs, n_cols, start) -> SimplexResult | None:
    m = len(rows)
    # column layout: originals [0, n), surplus [n, n + n_ge), artificials after
    n_ge = sum(1 for s in senses if s == ">=")
    art0 = n_cols + n_ge
    t_rows: list[Row] = []
    t_rhs: list[Fraction] = []
    signs: list[int] = []
    surplus = n_cols
    for i, (row, sense, b) in enumerate(zip(rows, senses, rhs)):
        r: Row = {int(k): Fraction(v) for k, v in row.items() if v}
        if sense == ">=":
            r[surplus] = Fraction(-1)
            surplus += 1
        elif sense != "=":
            raise ValueError(f"unsupported sense {sense!r}")
        b = Fraction(b)
        sign = 1
        if b < 0:
            sign = -1
            r = {k: -v for k, v in r.items()}
            b = -b
        r[art0 + i] = Fraction(1)
        t_rows.append(r)
        t_rhs.append(b)
        signs.append(sign)

    tab = _Tableau(t_rows, t_rhs, [art0 + i for i in range(m)])
    if start:
        for c in start:
            # pivot c in on a row still held by an artificial
            r = next((r for r in range(m)
                      if tab.basis[r] >= art0 and tab.rows[r].get(c)), None)
            if r is not None:
                tab.pivot(r, c)
        if any(b < 0 for b in tab.rhs):
            return None
    tab.set_objective({art0 + i: Fraction(1) for i in range(m)})
    tab.run(allowed=art0)
    if -tab.objval != 0:
        return SimplexResult(INFEASIBLE, [], [], None, tab.pivots)

    for r in range(m):
        if tab.basis[r] >= art0:
            k = min((k for k in tab.rows[r] if k < art0), default=None)
            if k is not None:
                tab.pivot(r, k)
            # otherwise the row is redundant and its artificial stays basic at 0

    cost_map = {j: Fraction(c) for j, c in enumerate(cost) if c}
    tab.set_objective(cost_map)
    status = tab.run(allowed=art0)
    if status != OPTIMAL:
        return SimplexResult(status, [], [], None, tab.pivots)

    x = [Fraction(0)] * n_cols
    for r, j in enumerate(tab.basis):
        if j < n_cols:
            x[j] = tab.rhs[r]
    y = [-signs[i] * tab.obj.get(art0 + i, Fraction(0)) for i in range(m)]
    return SimplexResult(OPTIMAL, x, y, -tab.objval, tab.pivots)
