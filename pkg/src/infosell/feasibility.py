"""Buyer-side quantities and an independent feasibility checker for mechanisms.

Types are addressed by zero-based index.  Every check works on the mechanism
alone (no knowledge of how it was built), so it applies equally to the
closed-form solver, the LP oracle, and hand-written mechanisms.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import Instance
from .optimal_mechanism import Mechanism

DEFAULT_TOL = 1e-9


def _at(vec: np.ndarray, t: int | None):
    if t is None:
        return vec
    return float(vec[t])


def _check_shape(inst: Instance, mech: Mechanism) -> None:
    if mech.pi.shape != (inst.m, inst.n):
        raise ValueError(f"mechanism has shape {mech.pi.shape}, instance needs {(inst.m, inst.n)}")


def weighted_prob(inst: Instance, mech: Mechanism, t: int | None = None):
    """P(t) = sum_q pi(q, t) g(q) v1(q); the whole vector when ``t`` is None."""
    _check_shape(inst, mech)
    return _at((inst.states.g * inst.states.v1) @ mech.pi, t)


def active_value(inst: Instance, mech: Mechanism) -> np.ndarray:
    """W(t) = sum_q g(q) pi(q, t) v(q, t): gross value from following the recommendation."""
    _check_shape(inst, mech)
    return inst.states.g @ (mech.pi * inst.values())


def utility(inst: Instance, mech: Mechanism, t: int | None = None):
    return _at(active_value(inst, mech) - mech.pay, t)


def surplus(inst: Instance, mech: Mechanism, t: int | None = None):
    u = active_value(inst, mech) - mech.pay
    return _at(u - np.maximum(inst.prior_values(), 0.0), t)


def revenue(inst: Instance, mech: Mechanism) -> float:
    return float(inst.types.f @ mech.pay)


def deviation_values(inst: Instance, mech: Mechanism) -> np.ndarray:
    """A[i, j] = sum_q g pi(q, t_j) v(q, t_i): value to type i of type j's
    recommendation when obeyed."""
    V = inst.values()
    return (inst.states.g[:, None] * V).T @ mech.pi


@dataclass(frozen=True)
class FeasibilityReport:
    p_monotone_signal: bool
    p_monotone_violation: float
    utility_identity_gap: float
    ir_low: float
    ir_high: float
    min_payment: float
    obedience_worst: float
    ic_worst: tuple  # (reporting type i, mimicked type j, gain)
    ic_original_worst: tuple
    surplus_shape_ok: bool
    surplus_shape_violation: float
    tol: float = DEFAULT_TOL

    def failures(self, tol: float | None = None) -> list[str]:
        tol = self.tol if tol is None else tol
        checks = {
            "signal_monotone": self.p_monotone_violation <= tol,
            "utility_identity": self.utility_identity_gap <= tol,
            "ir_low": self.ir_low >= -tol,
            "ir_high": self.ir_high >= -tol,
            "nonnegative_payment": self.min_payment >= -tol,
            "obedience": self.obedience_worst >= -tol,
            "ic": self.ic_worst[2] <= tol,
            "ic_original": self.ic_original_worst[2] <= tol,
            "surplus_shape": self.surplus_shape_violation <= tol,
        }
        return [name for name, ok in checks.items() if not ok]

    def ok(self, tol: float | None = None) -> bool:
        return not self.failures(tol)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ic_worst"] = list(self.ic_worst)
        out["ic_original_worst"] = list(self.ic_original_worst)
        out["failures"] = self.failures()
        out["ok"] = self.ok()
        return out


def _worst_pair(gain: np.ndarray) -> tuple:
    gain = gain.copy()
    np.fill_diagonal(gain, -np.inf)
    if gain.size <= 1:
        return (0, 0, 0.0)
    i, j = np.unravel_index(int(np.argmax(gain)), gain.shape)
    return (int(i), int(j), float(max(gain[i, j], 0.0)))


def _shape_violation(s: np.ndarray, v: np.ndarray) -> float:
    # split at the first type whose prior value is non-negative
    nonneg = np.nonzero(v >= 0)[0]
    k = int(nonneg[0]) if nonneg.size else s.size
    rising, falling = s[:k], s[k:]
    worst = 0.0
    if rising.size > 1:
        worst = max(worst, float(np.max(-np.diff(rising))))
    if falling.size > 1:
        worst = max(worst, float(np.max(np.diff(falling))))
    return max(worst, 0.0)


def check_feasible(inst: Instance, mech: Mechanism, tol: float = DEFAULT_TOL) -> FeasibilityReport:
    """Evaluate every feasibility condition and report worst violations.

    Negative slack means violation for ir_low, ir_high, min_payment and
    obedience_worst; the remaining numeric fields are violation magnitudes.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    _check_shape(inst, mech)
    grid = inst.types
    P = weighted_prob(inst, mech)
    v = inst.prior_values()
    W = active_value(inst, mech)
    u = W - mech.pay

    mono = float(np.max(-np.diff(P), initial=0.0))
    mono = max(mono, 0.0)

    du = np.diff(u)
    lo = grid.gap_prev[1:] * P[:-1]
    hi = grid.gap_prev[1:] * P[1:]
    identity_gap = float(np.max(np.maximum(lo - du, du - hi), initial=0.0))
    identity_gap = max(identity_gap, 0.0)

    # obedience in conditional form: following an active (passive) recommendation
    # must be weakly better than deviating to the other action
    not_active = v - W
    obedience = float(min(np.min(W), np.min(-not_active)))

    A = deviation_values(inst, mech)
    gain = A - mech.pay[None, :] - u[:, None]
    rest = v[:, None] - A
    gain_original = np.maximum(A, 0.0) + np.maximum(rest, 0.0) - mech.pay[None, :] - u[:, None]

    s = u - np.maximum(v, 0.0)
    shape = _shape_violation(s, v)

    return FeasibilityReport(
        p_monotone_signal=mono <= tol,
        p_monotone_violation=mono,
        utility_identity_gap=identity_gap,
        ir_low=float(u[0]),
        ir_high=float(u[-1] - v[-1]),
        min_payment=float(np.min(mech.pay)),
        obedience_worst=obedience,
        ic_worst=_worst_pair(gain),
        ic_original_worst=_worst_pair(gain_original),
        surplus_shape_ok=shape <= tol,
        surplus_shape_violation=shape,
        tol=tol,
    )
