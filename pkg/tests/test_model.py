import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infosell import model


def test_inst_d_values(inst_d):
    assert model.value(inst_d, 0, 0) == -3
    assert model.value(inst_d, 1, 1) == 2
    assert model.prior_value(inst_d, 0) == pytest.approx(0.0, abs=1e-12)
    assert model.prior_value(inst_d, 2) == pytest.approx(4.0, abs=1e-12)


def test_index_out_of_range(inst_d):
    with pytest.raises(model.IndexOutOfRange):
        model.value(inst_d, 3, 0)
    with pytest.raises(model.IndexOutOfRange):
        model.prior_value(inst_d, -1)


@pytest.mark.parametrize("kwargs, exc", [
    (dict(t=[1, 1], f=[0.5, 0.5]), model.NonIncreasingTypes),
    (dict(t=[1, 2], f=[1.0, 0.0]), model.NonPositiveMass),
    (dict(t=[1, 2], f=[0.5, 0.6]), model.MassNotOne),
    (dict(t=[1, 2], f=[0.5, 0.5], v1=[-1.0]), model.NegativeAlpha),
])
def test_validation_errors(kwargs, exc):
    base = dict(t=[1, 2], f=[0.5, 0.5], g=[1.0], v1=[1.0], v0=[0.0])
    base.update(kwargs)
    with pytest.raises(exc):
        model.make_instance(**base)


def test_small_mass_error_is_renormalised():
    inst = model.make_instance([1, 2], [0.5, 0.5 + 5e-10], [1.0], [1.0], [0.0])
    assert inst.types.f.sum() == pytest.approx(1.0, abs=1e-15)


def test_json_roundtrip(inst_d):
    raw = json.loads(json.dumps(model.instance_to_dict(inst_d)))
    back = model.validate_instance(raw)
    np.testing.assert_array_equal(back.values(), inst_d.values())
    np.testing.assert_array_equal(back.types.f, inst_d.types.f)


def test_json_rejects_unknown_and_missing_fields(inst_d):
    raw = model.instance_to_dict(inst_d)
    raw["types"][0]["extra"] = 1
    with pytest.raises(model.BadParams):
        model.validate_instance(raw)
    raw = model.instance_to_dict(inst_d)
    del raw["states"][1]["v0"]
    with pytest.raises(model.BadParams):
        model.validate_instance(raw)


def test_instances_are_immutable(inst_d):
    with pytest.raises(ValueError):
        inst_d.types.t[0] = 10.0


def test_family_errors():
    with pytest.raises(model.UnknownFamily):
        model.generate_family("nope")
    with pytest.raises(model.BadParams):
        model.generate_family("inst_c1", bogus=3)


def test_presets_match_worked_examples():
    c2 = model.generate_family("inst_c2", n=50, m=50)
    assert c2.types.t[0] > 3 and c2.types.t[-1] < 6
    # v(t) = 2.5 t - 6 on q ~ U[1,4]
    assert model.prior_value(c2, 0) == pytest.approx(2.5 * c2.types.t[0] - 6)
    c3 = model.generate_family("inst_c3", n=400, m=400)
    assert c3.prior_values()[-1] == pytest.approx(20.0, abs=0.1)


def test_equal_revenue_atom():
    inst = model.equal_revenue_example(C=100, n=400)
    assert inst.types.t[-1] == pytest.approx(50.0)
    assert inst.types.f[-1] == pytest.approx(8 / 100, rel=1e-12)
    # CDF of the continuous part: F(t) = 1 - 2C/t^2
    k = 200
    assert inst.types.cdf[k - 1] == pytest.approx(1 - 200 / inst.types.t[k] ** 2, rel=1e-12)


FAMILY_CASES = [
    ("inst_d", {}),
    ("inst_c1", dict(n=40, m=30)),
    ("inst_c2", dict(n=40, m=30)),
    ("inst_c3", dict(n=40, m=30)),
    ("equal_revenue_example", dict(C=100, n=60)),
    ("random", dict(seed=4)),
]


@pytest.mark.parametrize("name, params", FAMILY_CASES)
def test_family_invariants(name, params):
    inst = model.generate_family(name, **params)
    assert abs(inst.types.f.sum() - 1) <= 1e-12
    assert abs(inst.states.g.sum() - 1) <= 1e-12
    assert np.all(np.diff(inst.types.t) > 0)
    # value is non-decreasing in t for each state
    assert np.all(np.diff(inst.values(), axis=1) >= -1e-12)
    # prior value is affine in t
    t = inst.types.t
    v = inst.prior_values()
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    assert np.max(np.abs(A @ coef - v)) < 1e-12 * (1 + np.max(np.abs(v)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_instances_valid(seed):
    inst = model.random_family(seed=seed)
    assert 2 <= inst.n <= 6 and 2 <= inst.m <= 6
    assert np.all(inst.states.v1 >= 0)
