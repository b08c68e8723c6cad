"""Revenue-optimal mechanisms for selling information to a binary-action buyer."""

from .model import Instance, StateSpace, TypeGrid, generate_family, make_instance, validate_instance
from .optimal_mechanism import CaseLabel, Mechanism, ThresholdPolicy, classify, solve
from .feasibility import check_feasible, revenue
from .single_menu import ratio_report

__all__ = [
    "CaseLabel",
    "Instance",
    "Mechanism",
    "StateSpace",
    "ThresholdPolicy",
    "TypeGrid",
    "check_feasible",
    "classify",
    "generate_family",
    "make_instance",
    "ratio_report",
    "revenue",
    "solve",
    "validate_instance",
]
