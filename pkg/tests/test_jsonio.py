import json

import numpy as np
import pytest

from grouplattice.forms import Form
from grouplattice.gauge import GaugeField
from grouplattice.jsonio import (connection_from_json, connection_to_json, decode_complex,
                                 discrete_from_json, discrete_to_json, dumps, encode_complex,
                                 form_from_json, form_to_json, function_from_json, function_to_json,
                                 gauge_from_json, gauge_to_json)
from grouplattice.lincon import LinearConnection
from grouplattice.vector_fields import random_discrete


def reload(obj):
    return json.loads(dumps(obj))


def test_complex_round_trip():
    for z in (0, 1.5, -2j, 3 - 4j):
        assert decode_complex(encode_complex(z)) == z
    assert decode_complex(2) == 2
    assert encode_complex(-0.0) == [0.0, 0.0]
    with pytest.raises(ValueError):
        decode_complex("x")


def test_function_round_trip(s3, rng):
    f = rng.normal(size=s3.n) + 1j * rng.normal(size=s3.n)
    assert np.allclose(function_from_json(s3, reload(function_to_json(s3, f))), f)


@pytest.mark.parametrize("grade, fiber", [(0, ()), (1, ()), (2, ()), (1, (2, 2))])
def test_form_round_trip(s3, rng, grade, fiber):
    shape = (s3.n, s3.k ** grade) + fiber
    om = Form(s3, grade, rng.normal(size=shape) + 1j * rng.normal(size=shape))
    back = form_from_json(s3, reload(form_to_json(om)))
    assert back.grade == grade and np.allclose(back.coeffs, om.coeffs)


def test_discrete_round_trip(z6, rng):
    X = random_discrete(z6, rng)
    assert np.array_equal(discrete_from_json(z6, reload(discrete_to_json(X))).s, X.s)


def test_gauge_round_trip(s3, rng):
    Wf = GaugeField.random_unitary(s3, 2, rng)
    cfg = gauge_from_json(reload(gauge_to_json("S(3)", Wf)))
    assert cfg.S == ["(12)", "(13)", "(23)"]
    assert np.allclose(cfg.field.W, Wf.W)


def test_gauge_defaults_to_theta():
    cfg = gauge_from_json({"group": "Z(4)", "S": ["1", "2"], "m": 2})
    assert np.allclose(cfg.field.W, np.eye(2))
    cfg = gauge_from_json({"group": "Z(4)", "S": ["1", "2"], "W": {"1": {"0": [[[0, 1]]]}}})
    assert cfg.field.W[0, 0, 0, 0] == 1j and cfg.field.W[1, 0, 0, 0] == 1


def test_gauge_shape_mismatch():
    with pytest.raises(ValueError):
        gauge_from_json({"group": "Z(4)", "S": ["1", "2"], "m": 2, "W": {"1": {"0": [[1]]}}})


def test_connection_round_trip(z4, rng):
    C = LinearConnection.random(z4, rng)
    back = connection_from_json(z4, reload(connection_to_json(C)))
    assert np.allclose(back.V, C.V)


def test_dumps_is_deterministic(s3, rng):
    om = Form(s3, 1, rng.normal(size=(s3.n, s3.k)))
    assert dumps(form_to_json(om)) == dumps(form_to_json(om.copy()))
    assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')
