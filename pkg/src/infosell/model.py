"""Problem data for selling information to a binary-action buyer.

A buyer of private type ``t`` earns ``v(q, t) = v1(q) * t + v0(q)`` from the
active action in state ``q`` and 0 from the passive one.  Types and states are
independent and both finitely supported; continuous instances are represented
by their grid discretisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

MASS_TOL = 1e-12
RENORM_TOL = 1e-9


class ModelError(ValueError):
    """Base class for invalid instance data."""


class NonIncreasingTypes(ModelError):
    pass


class NonPositiveMass(ModelError):
    pass


class MassNotOne(ModelError):
    pass


class NegativeAlpha(ModelError):
    pass


class UnknownFamily(ModelError):
    pass


class BadParams(ModelError):
    pass


class IndexOutOfRange(IndexError):
    pass


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_masses(masses: np.ndarray, what: str) -> np.ndarray:
    if masses.size == 0:
        raise BadParams(f"{what}: at least one point is required")
    if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
        raise NonPositiveMass(f"{what}: every mass must be positive")
    total = float(masses.sum())
    off = abs(total - 1.0)
    if off <= MASS_TOL:
        return masses
    if off <= RENORM_TOL:
        return masses / total
    raise MassNotOne(f"{what}: masses sum to {total!r}, not 1")


@dataclass(frozen=True)
class TypeGrid:
    """Ordered buyer types ``t`` with probability masses ``f``."""

    t: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).ravel()
        f = np.asarray(self.f, dtype=float).ravel()
        if t.shape != f.shape:
            raise BadParams("types: t and f must have the same length")
        if not np.all(np.isfinite(t)):
            raise BadParams("types: t must be finite")
        if np.any(np.diff(t) <= 0):
            raise NonIncreasingTypes("types must be strictly increasing")
        f = _check_masses(f, "types")
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "f", _frozen(f))

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def cdf(self) -> np.ndarray:
        """F(t_i) = sum of f(t_j) for j <= i; the last entry is exactly 1."""
        F = np.cumsum(self.f)
        F[-1] = 1.0
        return F

    @property
    def cdf_before(self) -> np.ndarray:
        """F(t_{i-1}) with F(t_0) = 0."""
        return np.concatenate(([0.0], self.cdf[:-1]))

    @property
    def gap_next(self) -> np.ndarray:
        """t_{i+1} - t_i, zero at the last type (t_{N+1} := t_N)."""
        return np.append(np.diff(self.t), 0.0)

    @property
    def gap_prev(self) -> np.ndarray:
        """t_i - t_{i-1}, zero at the first type (t_0 := t_1)."""
        return np.concatenate(([0.0], np.diff(self.t)))


@dataclass(frozen=True)
class StateSpace:
    """States with prior ``g`` and value coefficients ``v1 >= 0`` and ``v0``."""

    labels: tuple
    g: np.ndarray
    v1: np.ndarray
    v0: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float).ravel()
        v1 = np.asarray(self.v1, dtype=float).ravel()
        v0 = np.asarray(self.v0, dtype=float).ravel()
        labels = tuple(str(x) for x in self.labels)
        if not (g.shape == v1.shape == v0.shape) or len(labels) != g.size:
            raise BadParams("states: labels, g, v1 and v0 must have the same length")
        if not (np.all(np.isfinite(v1)) and np.all(np.isfinite(v0))):
            raise BadParams("states: v1 and v0 must be finite")
        if np.any(v1 < 0):
            raise NegativeAlpha("states: v1 must be non-negative")
        g = _check_masses(g, "states")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "g", _frozen(g))
        object.__setattr__(self, "v1", _frozen(v1))
        object.__setattr__(self, "v0", _frozen(v0))

    @property
    def m(self) -> int:
        return self.g.size

    @property
    def rho(self) -> np.ndarray:
        """v0 / v1, NaN where v1 == 0."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.v1 > 0, self.v0 / np.where(self.v1 > 0, self.v1, 1.0), np.nan)


@dataclass(frozen=True)
class Instance:
    types: TypeGrid
    states: StateSpace
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.types.n

    @property
    def m(self) -> int:
        return self.states.m

    def values(self) -> np.ndarray:
        """Matrix ``v(q, t)`` indexed [state, type]."""
        s = self.states
        return np.outer(s.v1, self.types.t) + s.v0[:, None]

    def prior_values(self) -> np.ndarray:
        """v(t) = sum_q g(q) v(q, t) for every type."""
        return self.states.g @ self.values()


def make_instance(t, f, g, v1, v0, labels: Sequence | None = None, name: str = "") -> Instance:
    if labels is None:
        labels = [f"q{i + 1}" for i in range(len(np.atleast_1d(g)))]
    return Instance(TypeGrid(t, f), StateSpace(tuple(labels), g, v1, v0), name=name)


_TYPE_KEYS = {"t", "f"}
_STATE_KEYS = {"label", "g", "v1", "v0"}


def _require_keys(obj: Any, keys: set, where: str) -> None:
    if not isinstance(obj, Mapping):
        raise BadParams(f"{where}: expected an object")
    missing = keys - set(obj)
    extra = set(obj) - keys
    if missing:
        raise BadParams(f"{where}: missing fields {sorted(missing)}")
    if extra:
        raise BadParams(f"{where}: unknown fields {sorted(extra)}")


def validate_instance(raw: Any) -> Instance:
    """Build an :class:`Instance` from JSON-shaped data (or pass one through).

    Masses within 1e-9 of summing to one are renormalised; anything further
    off raises :class:`MassNotOne`.
    """
    if isinstance(raw, Instance):
        return Instance(TypeGrid(raw.types.t, raw.types.f),
                        StateSpace(raw.states.labels, raw.states.g, raw.states.v1, raw.states.v0),
                        name=raw.name)
    _require_keys(raw, {"types", "states"}, "instance")
    types, states = raw["types"], raw["states"]
    if not isinstance(types, Sequence) or not isinstance(states, Sequence):
        raise BadParams("instance: types and states must be lists")
    for i, item in enumerate(types):
        _require_keys(item, _TYPE_KEYS, f"types[{i}]")
    for i, item in enumerate(states):
        _require_keys(item, _STATE_KEYS, f"states[{i}]")
    try:
        return make_instance(
            t=[float(x["t"]) for x in types],
            f=[float(x["f"]) for x in types],
            g=[float(x["g"]) for x in states],
            v1=[float(x["v1"]) for x in states],
            v0=[float(x["v0"]) for x in states],
            labels=[str(x["label"]) for x in states],
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise BadParams(str(exc)) from exc


def instance_to_dict(inst: Instance) -> dict:
    return {
        "types": [{"t": float(t), "f": float(f)} for t, f in zip(inst.types.t, inst.types.f)],
        "states": [
            {"label": lab, "g": float(g), "v1": float(a), "v0": float(b)}
            for lab, g, a, b in zip(inst.states.labels, inst.states.g, inst.states.v1, inst.states.v0)
        ],
    }


def _check_index(idx: int, size: int, what: str) -> int:
    if not isinstance(idx, (int, np.integer)) or not 0 <= idx < size:
        raise IndexOutOfRange(f"{what} index {idx!r} out of range [0, {size})")
    return int(idx)


def value(inst: Instance, q: int, t: int) -> float:
    """v(q, t) = v1(q) * t + v0(q); ``q`` and ``t`` are zero-based indices."""
    q = _check_index(q, inst.m, "state")
    t = _check_index(t, inst.n, "type")
    return float(inst.states.v1[q] * inst.types.t[t] + inst.states.v0[q])


def prior_value(inst: Instance, t: int) -> float:
    """Expected value of the active action for type index ``t`` without information."""
    t = _check_index(t, inst.n, "type")
    return float(inst.prior_values()[t])


# --- instance families -----------------------------------------------------


def _midpoints(lo: float, hi: float, n: int) -> np.ndarray:
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5)


def uniform_product(t_range=(0.0, 1.0), q_range=(0.0, 1.0), v0=0.0, n=100, m=100,
                    v1_expr: str = "q", name: str = "") -> Instance:
    """Uniform type and state grids (cell midpoints, equal masses) with v1 = q."""
    if v1_expr != "q":
        raise BadParams(f"unsupported v1 expression {v1_expr!r}")
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise BadParams("grid sizes must be positive")
    (t_lo, t_hi), (q_lo, q_hi) = t_range, q_range
    if not (t_hi > t_lo and q_hi > q_lo):
        raise BadParams("ranges must have positive length")
    q = _midpoints(q_lo, q_hi, m)
    if np.any(q < 0):
        raise NegativeAlpha("v1 = q requires a non-negative state range")
    return make_instance(
        t=_midpoints(t_lo, t_hi, n), f=np.full(n, 1.0 / n),
        g=np.full(m, 1.0 / m), v1=q, v0=np.full(m, float(v0)),
        labels=[f"{x:.6g}" for x in q], name=name,
    )


def equal_revenue_example(C=100.0, n=400, m=None, name: str = "") -> Instance:
    """Type law F(t) = 1 - 2C/t^2 on [sqrt(2C), C/2) plus its residual atom at C/2.

    States are uniform on [0, C] with v(q, t) = t - q.  Each of the ``n - 1``
    continuous cells is represented by its left endpoint, so the induced value
    of full information t^2/(2C) is an equal-revenue distribution on the grid.
    """
    C = float(C)
    n = int(n)
    m = n if m is None else int(m)
    if C <= 8 or n < 2 or m < 1:
        raise BadParams("equal_revenue_example needs C > 8, n >= 2, m >= 1")
    lo, hi = math.sqrt(2 * C), C / 2
    edges = np.linspace(lo, hi, n)
    cdf = 1.0 - 2.0 * C / edges ** 2
    f = np.append(np.diff(cdf), 1.0 - cdf[-1])
    q = _midpoints(0.0, C, m)
    return make_instance(
        t=edges, f=f,
        g=np.full(m, 1.0 / m), v1=np.ones(m), v0=-q,
        labels=[f"{x:.6g}" for x in q], name=name,
    )


def inst_d() -> Instance:
    """Three types {3, 4, 5} and three states with v(q, t) = q t - 6, all uniform."""
    return make_instance(t=[3, 4, 5], f=[1 / 3] * 3, g=[1 / 3] * 3, v1=[1, 2, 3],
                         v0=[-6, -6, -6], labels=["1", "2", "3"], name="inst_d")


def random_instance(rng: np.random.Generator, n: int | None = None, m: int | None = None,
                    name: str = "random") -> Instance:
    """Corpus draw: N, M ~ U{2..6}, sorted U(0,10) types, Dirichlet(1) masses,
    v1 ~ U(0,2), v0 ~ U(-10,2)."""
    n = int(rng.integers(2, 7)) if n is None else n
    m = int(rng.integers(2, 7)) if m is None else m
    t = np.sort(rng.uniform(0.0, 10.0, n))
    f = rng.dirichlet(np.ones(n))
    g = rng.dirichlet(np.ones(m))
    v1 = rng.uniform(0.0, 2.0, m)
    v0 = rng.uniform(-10.0, 2.0, m)
    return make_instance(t, f, g, v1, v0, name=name)


def random_corpus(seed: int, count: int) -> list[Instance]:
    rng = np.random.default_rng(seed)
    return [random_instance(rng, name=f"random-{seed}-{i}") for i in range(count)]


def random_family(seed: int = 0, n: int | None = None, m: int | None = None,
                  name: str = "random") -> Instance:
    return random_instance(np.random.default_rng(seed), n=n, m=m, name=name)


FAMILIES = {
    "random": random_family,
    "uniform_product": uniform_product,
    "equal_revenue_example": equal_revenue_example,
}

# Named grids for the worked examples; sizes are overridable.
PRESETS = {
    "inst_c1": dict(t_range=(2.0, 3.0), q_range=(0.0, 1.0), v0=-2.0),
    "inst_c2": dict(t_range=(3.0, 6.0), q_range=(1.0, 4.0), v0=-6.0),
    "inst_c3": dict(t_range=(0.0, 10.0), q_range=(0.0, 10.0), v0=-30.0),
}


def generate_family(name: str, **params) -> Instance:
    if name == "inst_d":
        if params:
            raise BadParams("inst_d takes no parameters")
        return inst_d()
    if name in PRESETS:
        merged = {**PRESETS[name], **params}
        try:
            return uniform_product(name=name, **merged)
        except TypeError as exc:
            raise BadParams(str(exc)) from exc
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise UnknownFamily(f"unknown instance family {name!r}") from None
    try:
        return builder(name=name, **params)
    except TypeError as exc:
        raise BadParams(str(exc)) from exc
