"""Brute-force revenue maximisation over all IC/IR mechanisms by linear programming.

Variables are pi(q, t) (state-major, M*N of them) followed by p(t) (N).  The
program is small and dense, so it is solved with a self-contained two-phase
tableau simplex using Bland's rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import feasibility
from .model import Instance
from .optimal_mechanism import Mechanism

MAX_CELLS = 2000
PIVOT_TOL = 1e-9
MAX_ITER = 100_000


class OracleError(RuntimeError):
    pass


class TooLarge(OracleError):
    pass


class Unbounded(OracleError):
    pass


class Infeasible(OracleError):
    pass


class IterationLimit(OracleError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    """maximize c.x  s.t.  A x <= b,  0 <= x <= upper."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    upper: np.ndarray
    row_names: tuple
    var_names: tuple
    n_types: int
    n_states: int

    @property
    def n_vars(self) -> int:
        return self.c.size

    def to_text(self) -> str:
        """Line-oriented export: objective, then one line per row, then bounds."""
        lines = [f"maximize {self.n_vars} vars {len(self.row_names)} rows"]
        lines.append("obj " + " ".join(
            f"{name} {coef:.12g}" for name, coef in zip(self.var_names, self.c) if coef != 0))
        for name, row, rhs in zip(self.row_names, self.A, self.b):
            terms = " ".join(f"{self.var_names[j]} {row[j]:.12g}" for j in np.nonzero(row)[0])
            lines.append(f"row {name} <= {rhs:.12g} : {terms}")
        for name, ub in zip(self.var_names, self.upper):
            lines.append(f"bound {name} 0 {'inf' if np.isinf(ub) else format(ub, '.12g')}")
        return "\n".join(lines) + "\n"


def _pi_index(q: int, t: int, n: int) -> int:
    return q * n + t


def build_lp(inst: Instance) -> LinearProgram:
    n, m = inst.n, inst.m
    if n * m > MAX_CELLS:
        raise TooLarge(f"N*M = {n * m} exceeds the oracle limit {MAX_CELLS}")
    nv = m * n + n
    gV = inst.states.g[:, None] * inst.values()  # g(q) v(q, t)
    v = inst.prior_values()
    rows, rhs, names = [], [], []

    # IR: sum_q pi g v - p(t) >= max(0, v(t))
    for k in range(n):
        row = np.zeros(nv)
        row[[_pi_index(q, k, n) for q in range(m)]] = -gV[:, k]
        row[m * n + k] = 1.0
        rows.append(row)
        rhs.append(-max(0.0, float(v[k])))
        names.append(f"IR[{k}]")

    # IC: sum_q (pi(q,t) - pi(q,t')) g v(q,t) - p(t) + p(t') >= 0
    for k in range(n):
        for j in range(n):
            if j == k:
                continue
            row = np.zeros(nv)
            for q in range(m):
                row[_pi_index(q, k, n)] -= gV[q, k]
                row[_pi_index(q, j, n)] += gV[q, k]
            row[m * n + k] += 1.0
            row[m * n + j] -= 1.0
            rows.append(row)
            rhs.append(0.0)
            names.append(f"IC[{k},{j}]")

    c = np.zeros(nv)
    c[m * n:] = inst.types.f
    upper = np.concatenate((np.ones(m * n), np.full(n, np.inf)))
    var_names = tuple([f"pi[{q},{t}]" for q in range(m) for t in range(n)]
                      + [f"p[{t}]" for t in range(n)])
    A = np.array(rows).reshape(len(rows), nv)
    return LinearProgram(c=c, A=A, b=np.array(rhs), upper=upper, row_names=tuple(names),
                         var_names=var_names, n_types=n, n_states=m)


# --- simplex -------------------------------------------------------------------


def _pivot(T: np.ndarray, basis: np.ndarray, r: int, col: int) -> None:
    pivot_row = T[r] / T[r, col]
    T -= np.outer(T[:, col], pivot_row)
    T[r] = pivot_row
    basis[r] = col


def _iterate(T: np.ndarray, basis: np.ndarray, allowed: np.ndarray, budget: list) -> None:
    # maximisation; the last row holds reduced costs and -objective
    m = T.shape[0] - 1
    while True:
        if budget[0] <= 0:
            raise IterationLimit("simplex iteration limit reached")
        budget[0] -= 1
        entering = np.nonzero((T[-1, :-1] > PIVOT_TOL) & allowed)[0]
        if entering.size == 0:
            return
        col = int(entering[0])  # Bland: lowest index
        column = T[:m, col]
        pos = column > PIVOT_TOL
        if not pos.any():
            raise Unbounded("objective is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + 1e-12 * (1.0 + abs(best)))[0]
        r = int(ties[np.argmin(basis[ties])])
        _pivot(T, basis, r, col)


def simplex(c, A, b, max_iter: int = MAX_ITER) -> np.ndarray:
    """Maximise c.x subject to A x <= b, x >= 0 (two-phase, Bland's rule)."""
    c = np.asarray(c, float)
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    m, n = A.shape
    neg = b < 0
    n_art = int(neg.sum())
    width = n + m + n_art
    T = np.zeros((m + 1, width + 1))
    sign = np.where(neg, -1.0, 1.0)
    T[:m, :n] = A * sign[:, None]
    T[:m, n:n + m] = np.diag(sign)
    T[:m, -1] = b * sign
    basis = np.empty(m, dtype=int)
    basis[~neg] = n + np.nonzero(~neg)[0]
    art_rows = np.nonzero(neg)[0]
    for a, r in enumerate(art_rows):
        T[r, n + m + a] = 1.0
        basis[r] = n + m + a
    budget = [max_iter]
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0))

    if n_art:
        # phase 1: maximise -sum(artificials)
        T[-1, :] = T[art_rows].sum(axis=0)
        T[-1, n + m:width] = 0.0
        allowed = np.zeros(width, bool)
        allowed[:n + m] = True
        _iterate(T, basis, allowed, budget)
        if T[-1, -1] > 1e-8 * scale:
            raise Infeasible(f"phase 1 ended with infeasibility {T[-1, -1]:.3g}")
        # drive zero-level artificials out of the basis
        keep = np.ones(m, bool)
        for r in range(m):
            if basis[r] >= n + m:
                cand = np.nonzero(np.abs(T[r, :n + m]) > PIVOT_TOL)[0]
                if cand.size:
                    _pivot(T, basis, r, int(cand[0]))
                else:
                    keep[r] = False
        rows = np.concatenate((np.nonzero(keep)[0], [m]))
        T = T[rows][:, list(range(n + m)) + [width]]
        basis = basis[keep]
        m = basis.size

    cost = np.concatenate((c, np.zeros(T.shape[1] - 1 - n)))
    T[-1, :-1] = cost
    T[-1, -1] = 0.0
    T[-1] -= cost[basis] @ T[:m]
    _iterate(T, basis, np.ones(T.shape[1] - 1, bool), budget)

    x = np.zeros(T.shape[1] - 1)
    x[basis] = T[:m, -1]
    return x[:n]


def solve_lp(lp: LinearProgram) -> tuple[float, Mechanism, str]:
    """Optimal revenue and an optimal (basic) mechanism."""
    finite = np.nonzero(np.isfinite(lp.upper))[0]
    box = np.zeros((finite.size, lp.n_vars))
    box[np.arange(finite.size), finite] = 1.0
    A = np.vstack((lp.A, box))
    b = np.concatenate((lp.b, lp.upper[finite]))
    x = simplex(lp.c, A, b)
    m, n = lp.n_states, lp.n_types
    pi = np.clip(x[:m * n].reshape(m, n), 0.0, 1.0)
    pay = np.maximum(x[m * n:], 0.0)
    mech = Mechanism(pi=pi, pay=pay)
    return float(lp.c @ x), mech, "optimal"


def oracle_revenue(inst: Instance) -> tuple[float, Mechanism]:
    rev, mech, _ = solve_lp(build_lp(inst))
    return rev, mech


@dataclass(frozen=True)
class OracleReport:
    closed_revenue: float
    oracle_revenue: float
    gap: float  # oracle - closed
    abs_gap: float
    rel_gap: float  # abs_gap / max(1, oracle)
    oracle_feasible: bool | None
    oracle_failures: tuple = ()

    def ok(self, tol: float = 1e-5, dominance_tol: float = 1e-7) -> bool:
        feasible = self.oracle_feasible is not False
        return self.rel_gap <= tol and self.gap >= -dominance_tol and feasible

    def to_dict(self) -> dict:
        return {
            "closed_revenue": self.closed_revenue,
            "oracle_revenue": self.oracle_revenue,
            "gap": self.gap,
            "abs_gap": self.abs_gap,
            "rel_gap": self.rel_gap,
            "oracle_feasible": self.oracle_feasible,
            "oracle_failures": list(self.oracle_failures),
        }


def compare(inst: Instance, closed: Mechanism, oracle_rev: float,
            oracle_mech: Mechanism | None = None, tol: float = 1e-7) -> OracleReport:
    closed_rev = feasibility.revenue(inst, closed)
    gap = oracle_rev - closed_rev
    feasible, failures = None, ()
    if oracle_mech is not None:
        failures = tuple(feasibility.check_feasible(inst, oracle_mech, tol).failures())
        feasible = not failures
    return OracleReport(closed_revenue=closed_rev, oracle_revenue=float(oracle_rev), gap=gap,
                        abs_gap=abs(gap), rel_gap=abs(gap) / max(1.0, abs(oracle_rev)),
                        oracle_feasible=feasible, oracle_failures=failures)
