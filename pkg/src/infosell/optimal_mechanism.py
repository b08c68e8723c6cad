"""Closed-form revenue-optimal threshold mechanisms on a discrete instance.

The seller's revenue, written against the IC utility identity, is a sum of
per-entry virtual surpluses minus an information rent.  Where the rent is
anchored depends on which participation constraint binds:

* ``LowTail``  (u(t_1) = 0): threshold -lower^+ , payments built upward;
* ``HighTail`` (u(t_N) = v(t_N)): threshold -upper^+, payments built downward;
* ``Mixed``    (both bind): threshold -phi_c^+ for the mixing constant ``c``
  at which the utility budget exactly reaches v(t_N), with randomisation ``D``
  on the boundary entries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import virtual_value as vv
from .model import Instance

LOW_TAIL = "LowTail"
HIGH_TAIL = "HighTail"
MIXED = "Mixed"

PAY_TOL = 1e-9
MAX_BISECT = 200
F_TIE = 1e-10


class MechanismError(RuntimeError):
    pass


class NotMixedCase(MechanismError):
    pass


class EmptyBoundary(MechanismError):
    pass


class NegativePayment(MechanismError):
    pass


@dataclass(frozen=True)
class Mechanism:
    """Experiment ``pi`` [state x type] (probability of recommending the active
    action) and payment per type."""

    pi: np.ndarray
    pay: np.ndarray

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        pay = np.array(self.pay, dtype=float).ravel()
        if pi.ndim != 2 or pi.shape[1] != pay.size:
            raise ValueError("pi must be [states x types] with one payment per type")
        if np.any(pi < -1e-12) or np.any(pi > 1 + 1e-12):
            raise ValueError("pi entries must lie in [0, 1]")
        pi = np.clip(pi, 0.0, 1.0)
        pi.setflags(write=False)
        pay.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "pay", pay)


@dataclass(frozen=True)
class CaseLabel:
    tag: str
    v_low: float
    v_high: float
    c: float | None = None
    boundary_fraction: float | None = None


@dataclass(frozen=True)
class ThresholdPolicy:
    theta: np.ndarray
    pi: np.ndarray
    boundary_fraction: float = 0.0
    boundary_set: tuple = ()
    # u(t_i) - u(t_{i-1}) per type (first entry 0); fixed by the Mixed case only
    increments: np.ndarray | None = None


@dataclass
class Solution:
    mechanism: Mechanism
    label: CaseLabel
    policy: ThresholdPolicy
    diagnostics: dict = field(default_factory=dict)

    @property
    def revenue(self) -> float:
        return self.diagnostics["revenue"]


# --- helpers -----------------------------------------------------------------


def _tie_tol(inst: Instance) -> float:
    rho = inst.states.rho
    finite = rho[np.isfinite(rho)]
    scale = 1.0 + float(np.max(np.abs(inst.types.t)))
    if finite.size:
        scale += float(np.max(np.abs(finite)))
    return 1e-9 * scale


def allocation(inst: Instance, ironed: np.ndarray, ties: bool = True) -> np.ndarray:
    """Threshold experiment: recommend the active action iff rho(q) >= -ironed(t).

    Entries within tolerance of the threshold are included iff ``ties``.
    States with v1 = 0 are recommended iff v0 >= 0.
    """
    s = inst.states
    tol = _tie_tol(inst)
    active = s.v1 > 0
    pi = np.zeros((inst.m, inst.n))
    margin = s.rho[active][:, None] + np.asarray(ironed)[None, :]
    pi[active] = (margin >= -tol) if ties else (margin > tol)
    pi[~active] = (s.v0[~active] >= 0)[:, None]
    return pi


def weighted_probs(inst: Instance, pi: np.ndarray) -> np.ndarray:
    """P(t) = sum_q pi(q, t) g(q) v1(q) for every type."""
    return (inst.states.g * inst.states.v1) @ pi


def _lower_increments(inst: Instance, P: np.ndarray) -> np.ndarray:
    d = np.zeros(inst.n)
    d[1:] = inst.types.gap_prev[1:] * P[:-1]
    return d


def _upper_increments(inst: Instance, P: np.ndarray) -> np.ndarray:
    d = np.zeros(inst.n)
    d[1:] = inst.types.gap_prev[1:] * P[1:]
    return d


def _split_increments(inst: Instance, P: np.ndarray, c: float, high: bool) -> np.ndarray:
    """Cheapest utility increments for weight ``c``: lower below the crossing,
    upper above it, and the extreme ``high`` choice where F(t_{i-1}) == c."""
    lo = _lower_increments(inst, P)
    hi = _upper_increments(inst, P)
    Fb = inst.types.cdf_before
    use_hi = Fb > c + F_TIE
    if high:
        use_hi |= np.abs(Fb - c) <= F_TIE
    use_hi[0] = False
    return np.where(use_hi, hi, lo)


def _budget_solution(inst: Instance, c: float, high: bool):
    curve = vv.split_curve(inst.types, c)
    pi = allocation(inst, curve.ironed, ties=high)
    d = _split_increments(inst, weighted_probs(inst, pi), c, high)
    return curve, pi, d


# --- public operations ---------------------------------------------------------


def case_bounds(inst: Instance) -> tuple[float, float]:
    """(V_L, V_H): utility budgets of the lower- and upper-threshold experiments."""
    base = max(0.0, float(inst.prior_values()[0]))
    P_low = weighted_probs(inst, allocation(inst, vv.lower_curve(inst.types).ironed))
    P_high = weighted_probs(inst, allocation(inst, vv.upper_curve(inst.types).ironed))
    v_low = base + float(_lower_increments(inst, P_low).sum())
    v_high = base + float(_upper_increments(inst, P_high).sum())
    return v_low, v_high


def _value_scale(inst: Instance) -> float:
    return 1.0 + float(np.max(np.abs(inst.values())))


def find_mixing_constant(inst: Instance, bounds: tuple[float, float] | None = None,
                         max_iter: int = MAX_BISECT) -> tuple[float, float]:
    """Largest c whose maximal utility budget still reaches v(t_N), and the
    boundary fraction D that makes the budget bind exactly."""
    c, D, _ = _mixing_search(inst, bounds, max_iter)
    return c, D


def _mixing_search(inst: Instance, bounds=None, max_iter: int = MAX_BISECT):
    v = inst.prior_values()
    target = float(v[-1])
    v_low, v_high = case_bounds(inst) if bounds is None else bounds
    if _tag(inst, v, v_low, v_high) != MIXED:
        raise NotMixedCase("instance is not in the mixed case")

    def budget(c, high):
        return float(_budget_solution(inst, c, high)[2].sum())

    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        if hi - lo < 1e-14:
            break
        mid = 0.5 * (lo + hi)
        if budget(mid, True) >= target:
            lo = mid
        else:
            hi = mid
    c = lo
    curve, pi_a, d_a = _budget_solution(inst, c, True)
    _, pi_b, d_b = _budget_solution(inst, c, False)
    y_a, y_b = float(d_a.sum()), float(d_b.sum())
    tol = 1e-9 * _value_scale(inst)
    if y_a - y_b <= tol:
        if abs(y_a - target) > tol:
            raise EmptyBoundary(
                f"no boundary mass at c={c:.6g}; budget {y_a:.12g} != v(t_N) {target:.12g}")
        D = 1.0
    else:
        D = min(1.0, max(0.0, (target - y_b) / (y_a - y_b)))
    parts = dict(curve=curve, pi_a=pi_a, pi_b=pi_b, d_a=d_a, d_b=d_b)
    return c, D, parts


def _tag(inst: Instance, v: np.ndarray, v_low: float, v_high: float) -> str:
    tol = 1e-12 * _value_scale(inst)
    if v[0] <= 0 and v[-1] <= v_low + tol:
        return LOW_TAIL
    if v[-1] >= v_high - tol:
        return HIGH_TAIL
    return MIXED


def classify(inst: Instance) -> CaseLabel:
    v_low, v_high = case_bounds(inst)
    tag = _tag(inst, inst.prior_values(), v_low, v_high)
    if tag != MIXED:
        return CaseLabel(tag, v_low, v_high)
    c, D = find_mixing_constant(inst, (v_low, v_high))
    return CaseLabel(tag, v_low, v_high, c=c, boundary_fraction=D)


def build_threshold_policy(inst: Instance, label: CaseLabel) -> ThresholdPolicy:
    if label.tag == LOW_TAIL:
        curve = vv.lower_curve(inst.types)
    elif label.tag == HIGH_TAIL:
        curve = vv.upper_curve(inst.types)
    elif label.tag == MIXED:
        return _mixed_policy(inst, label)
    else:
        raise ValueError(f"unknown case tag {label.tag!r}")
    theta = -curve.ironed
    return ThresholdPolicy(theta=theta, pi=allocation(inst, curve.ironed))


def _mixed_policy(inst: Instance, label: CaseLabel) -> ThresholdPolicy:
    c, D, parts = _mixing_search(inst, (label.v_low, label.v_high))
    pi_a, pi_b = parts["pi_a"], parts["pi_b"]
    pi = D * pi_a + (1.0 - D) * pi_b
    d = D * parts["d_a"] + (1.0 - D) * parts["d_b"]
    boundary = tuple(zip(*np.nonzero(pi_a != pi_b)))
    boundary = tuple((int(q), int(t)) for q, t in boundary)
    return ThresholdPolicy(theta=-parts["curve"].ironed, pi=pi, boundary_fraction=D if boundary else 0.0,
                           boundary_set=boundary, increments=d)


def payments(inst: Instance, policy: ThresholdPolicy, label: CaseLabel) -> Mechanism:
    """Payments that make the binding participation constraint(s) tight.

    LowTail:  p(t_k) = W(t_k) - sum_{i=2..k} (t_i - t_{i-1}) P(t_{i-1})
    HighTail: p(t_k) = W(t_k) - v(t_N) + sum_{i=k+1..N} (t_i - t_{i-1}) P(t_i)
    Mixed:    the LowTail form below the crossing type, the HighTail form above,
              with the budget closed exactly at v(t_N).
    where W(t) = sum_q g(q) pi(q, t) v(q, t).
    """
    pi = policy.pi
    W = inst.states.g @ (pi * inst.values())
    P = weighted_probs(inst, pi)
    if label.tag == LOW_TAIL:
        u = np.cumsum(_lower_increments(inst, P))
    elif label.tag == HIGH_TAIL:
        d = _upper_increments(inst, P)
        v_top = float(inst.prior_values()[-1])
        # u(t_k) = v(t_N) - sum_{i>k} d_i
        u = v_top - (d.sum() - np.cumsum(d))
    else:
        if policy.increments is None:
            raise ValueError("mixed policy must carry its utility increments")
        u = np.cumsum(policy.increments)
    pay = W - u
    if np.any(pay < -PAY_TOL * _value_scale(inst)):
        k = int(np.argmin(pay))
        raise NegativePayment(f"payment {pay[k]:.3g} < 0 at type index {k}")
    return Mechanism(pi=pi, pay=np.maximum(pay, 0.0))


def split_payments(inst: Instance, pi: np.ndarray, c: float) -> np.ndarray:
    """Mixed-case payments in closed form: LowTail formula where F(t_k) <= c,
    HighTail formula elsewhere (exact when no F(t_{k-1}) equals c)."""
    W = inst.states.g @ (pi * inst.values())
    P = weighted_probs(inst, pi)
    lo = W - np.cumsum(_lower_increments(inst, P))
    d = _upper_increments(inst, P)
    hi = W - float(inst.prior_values()[-1]) + (d.sum() - np.cumsum(d))
    return np.where(inst.types.cdf <= c, lo, hi)


def solve(inst: Instance) -> Solution:
    """Classify, build the threshold experiment, and price it."""
    start = time.perf_counter()
    label = classify(inst)
    policy = build_threshold_policy(inst, label)
    mech = payments(inst, policy, label)
    revenue = float(inst.types.f @ mech.pay)
    diagnostics = {
        "case": label.tag,
        "revenue": revenue,
        "V_L": label.v_low,
        "V_H": label.v_high,
        "c": label.c,
        "D": label.boundary_fraction,
        "seconds": time.perf_counter() - start,
    }
    return Solution(mechanism=mech, label=label, policy=policy, diagnostics=diagnostics)


# --- export --------------------------------------------------------------------


def solution_to_dict(inst: Instance, sol: Solution) -> dict:
    d = sol.diagnostics
    return {
        "case": sol.label.tag,
        "theta": sol.policy.theta.tolist(),
        "pi": sol.mechanism.pi.tolist(),
        "pay": sol.mechanism.pay.tolist(),
        "c": d["c"],
        "D": d["D"],
        "revenue": d["revenue"],
        "V_L": d["V_L"],
        "V_H": d["V_H"],
        "boundary_set": [list(x) for x in sol.policy.boundary_set],
    }


def solution_table(inst: Instance, sol: Solution) -> list[list[float]]:
    """Rows (t, theta, pay, P, u, s), one per type."""
    mech = sol.mechanism
    P = weighted_probs(inst, mech.pi)
    u = inst.states.g @ (mech.pi * inst.values()) - mech.pay
    s = u - np.maximum(inst.prior_values(), 0.0)
    cols = (inst.types.t, sol.policy.theta, mech.pay, P, u, s)
    return [list(map(float, row)) for row in zip(*cols)]


TABLE_HEADER = ("t", "theta", "pay", "P", "u", "s")
