"""The single-experiment benchmark: sell full revelation at one posted price."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import optimal_mechanism
from .model import Instance


def full_info_values(inst: Instance) -> np.ndarray:
    """e(t) = sum_q g max(v(q,t), 0) - max(v(t), 0) for every type."""
    V = inst.values()
    e = inst.states.g @ np.maximum(V, 0.0) - np.maximum(inst.prior_values(), 0.0)
    return np.maximum(e, 0.0)  # clears -1e-16 rounding


def full_info_value(inst: Instance, t: int) -> float:
    return float(full_info_values(inst)[t])


def myerson_reserve(inst: Instance) -> tuple[float, float]:
    """Best posted price for full information; candidates are the e(t_i) values."""
    e = full_info_values(inst)
    f = inst.types.f
    best_r, best_rev = 0.0, 0.0
    for r in np.unique(e):
        rev = float(r * f[e >= r].sum())
        if rev > best_rev:
            best_r, best_rev = float(r), rev
    return best_r, best_rev


def e_distribution(inst: Instance) -> tuple[np.ndarray, np.ndarray]:
    """Support and masses of e(t) under t ~ f, ties merged."""
    e = full_info_values(inst)
    support, inverse = np.unique(e, return_inverse=True)
    mass = np.bincount(inverse, weights=inst.types.f, minlength=support.size)
    return support, mass


def is_mhr(inst: Instance, tol: float = 1e-12) -> bool:
    """Discrete hazard f_j / P(e >= e_j) non-decreasing over the sorted support."""
    _, mass = e_distribution(inst)
    survival = np.cumsum(mass[::-1])[::-1]
    hazard = mass / survival
    return bool(np.all(np.diff(hazard) >= -tol))


@dataclass(frozen=True)
class SingleMenuReport:
    e_values: np.ndarray
    reserve: float
    rev_single: float
    rev_optimal: float
    welfare: float
    ratio: float
    mhr_flag: bool

    def to_dict(self) -> dict:
        out = asdict(self)
        out["e_values"] = [float(x) for x in self.e_values]
        return out


def ratio_report(inst: Instance, rev_optimal: float | None = None) -> SingleMenuReport:
    if rev_optimal is None:
        rev_optimal = optimal_mechanism.solve(inst).revenue
    e = full_info_values(inst)
    reserve, rev_single = myerson_reserve(inst)
    welfare = float(inst.types.f @ e)
    ratio = rev_single / rev_optimal if rev_optimal > 0 else 1.0
    return SingleMenuReport(e_values=e, reserve=reserve, rev_single=rev_single,
                            rev_optimal=float(rev_optimal), welfare=welfare,
                            ratio=float(ratio), mhr_flag=is_mhr(inst))
