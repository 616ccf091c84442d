import json
import math

import numpy as np
import pytest

from drlqc import (
    ParseError,
    ValidationError,
    builtin_problem,
    load_problem_config,
    serialize_problem_config,
)


def test_pho_case1_preset():
    spec, gamma = builtin_problem("pho", 1)
    assert gamma == 0.60
    np.testing.assert_array_equal(spec.u_lower, [-0.4, -0.5])
    np.testing.assert_array_equal(spec.u_upper, [0.1, 0.1])
    assert np.all(np.isinf(spec.x_lower)) and np.all(np.isinf(spec.x_upper))
    np.testing.assert_array_equal(spec.x0, [0.0, 1.0])
    np.testing.assert_array_equal(spec.xf, [0.0, 0.0])
    assert spec.tf == pytest.approx(2 * math.pi)
    np.testing.assert_array_equal(spec.A, [[0.0, 1.0], [-4.0, 0.0]])


def test_pho_case2_adds_state_bound():
    spec, gamma = builtin_problem("pho", 2)
    assert gamma == 0.95
    assert spec.x_lower[0] == -0.025
    assert np.isinf(spec.x_lower[1])


def test_psm_presets():
    spec, gamma = builtin_problem("psm", 1)
    assert gamma == 0.55
    np.testing.assert_array_equal(spec.u_lower, [-0.5, -0.4])
    np.testing.assert_array_equal(spec.u_upper, [0.5, 0.4])
    np.testing.assert_array_equal(spec.x0, [0.0, 1.0, 1.0, -1.0])
    np.testing.assert_array_equal(spec.xf, np.zeros(4))
    spec2, gamma2 = builtin_problem("psm", 2)
    assert gamma2 == 0.95
    assert spec2.x_lower[0] == -0.2
    expected_a = np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [-3.0, 0.0, 2.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [2.0, 0.0, -2.0, 0.0],
        ]
    )
    np.testing.assert_array_equal(spec2.A, expected_a)


def test_unknown_problem_rejected():
    with pytest.raises(ValidationError):
        builtin_problem("pendulum", 1)
    with pytest.raises(ValidationError):
        builtin_problem("pho", 3)


def test_round_trip_all_builtins():
    for name in ("pho", "psm"):
        for case in (1, 2):
            spec, _ = builtin_problem(name, case)
            loaded = load_problem_config(serialize_problem_config(spec))
            assert loaded.n == spec.n and loaded.m == spec.m
            assert loaded.t0 == spec.t0 and loaded.tf == spec.tf
            np.testing.assert_array_equal(loaded.A, spec.A)
            np.testing.assert_array_equal(loaded.B, spec.B)
            np.testing.assert_array_equal(loaded.q, spec.q)
            np.testing.assert_array_equal(loaded.r, spec.r)
            np.testing.assert_array_equal(loaded.x0, spec.x0)
            np.testing.assert_array_equal(loaded.xf, spec.xf)
            np.testing.assert_array_equal(loaded.x_lower, spec.x_lower)
            np.testing.assert_array_equal(loaded.x_upper, spec.x_upper)
            np.testing.assert_array_equal(loaded.u_lower, spec.u_lower)
            np.testing.assert_array_equal(loaded.u_upper, spec.u_upper)


def _pho_case1_doc():
    return {
        "n": 2,
        "m": 2,
        "t0": 0.0,
        "tf": 2 * math.pi,
        "A": [[0.0, 1.0], [-4.0, 0.0]],
        "B": [[1.0, 0.0], [0.0, 1.0]],
        "q": [1.0, 1.0],
        "r": [1.0, 1.0],
        "x0": [0.0, 1.0],
        "xf": [0.0, 0.0],
        "u_lower": [-0.4, -0.5],
        "u_upper": [0.1, 0.1],
    }


def test_document_matches_builtin():
    spec = load_problem_config(json.dumps(_pho_case1_doc()))
    builtin, _ = builtin_problem("pho", 1)
    np.testing.assert_array_equal(spec.A, builtin.A)
    np.testing.assert_array_equal(spec.u_lower, builtin.u_lower)
    np.testing.assert_array_equal(spec.x_lower, builtin.x_lower)
    assert spec.tf == builtin.tf


def test_zero_r_rejected():
    doc = _pho_case1_doc()
    doc["r"] = [0.0, 1.0]
    with pytest.raises(ValidationError):
        load_problem_config(json.dumps(doc))


def test_dimension_mismatch_rejected():
    doc = _pho_case1_doc()
    doc["x0"] = [0.0, 1.0, 2.0]
    with pytest.raises(ValidationError):
        load_problem_config(json.dumps(doc))


def test_missing_field_is_parse_error():
    doc = _pho_case1_doc()
    del doc["B"]
    with pytest.raises(ParseError, match="B"):
        load_problem_config(json.dumps(doc))


def test_malformed_json_is_parse_error():
    with pytest.raises(ParseError, match="line"):
        load_problem_config("{\n  broken\n}")


def test_null_bound_entries_mean_unbounded():
    doc = _pho_case1_doc()
    doc["x_lower"] = [-0.025, None]
    spec = load_problem_config(json.dumps(doc))
    assert spec.x_lower[0] == -0.025
    assert np.isneginf(spec.x_lower[1])


def test_non_numeric_field_is_parse_error():
    doc = _pho_case1_doc()
    doc["q"] = ["a", "b"]
    with pytest.raises(ParseError):
        load_problem_config(json.dumps(doc))
