import json

import numpy as np
import pytest

from netfhn.config import DEFAULTS, ConfigError, parse_config

PATH = {"graph": {"n_vertices": 2, "edges": [[1, 2]]}}


def _cfg(**extra):
    return json.dumps({**PATH, **extra})


def test_minimal_config_uses_defaults():
    cfg = parse_config(_cfg())
    assert cfg.graph.n_edges == 1
    np.testing.assert_array_equal(cfg.fhn.a, [DEFAULTS["edge"]["a"]])
    np.testing.assert_array_equal(cfg.vertex_params.b, [1.0, 1.0])
    np.testing.assert_array_equal(cfg.vertex_params.sigma, [1.0, 1.0])
    assert cfg.scheme.dt == DEFAULTS["scheme"]["dt"]
    assert cfg.points_per_edge == 16
    problem = cfg.build_problem()
    np.testing.assert_array_equal(problem.x0, 0.0)


def test_indices_are_one_based():
    cfg = parse_config(json.dumps({"graph": {"n_vertices": 3, "edges": [[2, 3], [3, 1]]}}))
    assert cfg.graph.edges == ((1, 2), (2, 0))


def test_threshold_violation_named():
    with pytest.raises(ConfigError) as exc:
        parse_config(_cfg(edges=[{"a": 1.2}]))
    assert any("a_j must lie in (0, 1)" in e and "threshold" in e for e in exc.value.errors)


def test_discontinuous_initial_data():
    text = json.dumps({"graph": {"n_vertices": 3, "edges": [[1, 2], [2, 3]]},
                       "initial": {"edges": [[0.0, 1.0], [0.5]]}})
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert any("node continuity" in e and "vertex 2" in e for e in exc.value.errors)


def test_all_violations_reported():
    text = _cfg(edges=[{"a": 1.5, "mu": -1, "c": [-1.0, 0.5]}],
                vertices=[{"b": -1, "sigma": 0}, {"b": 0, "sigma": 1}],
                scheme={"dt": -1})
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    joined = "\n".join(exc.value.errors)
    for needle in ("threshold", "positive weights", "positive diffusion", "leak condition",
                   "noise amplitude", "scheme.dt"):
        assert needle in joined


def test_leak_required_only_when_invertibility_requested():
    no_leak = [{"b": 0}, {"b": 0}]
    with pytest.raises(ConfigError) as exc:
        parse_config(_cfg(vertices=no_leak))
    assert any("at least one b_i" in e for e in exc.value.errors)
    cfg = parse_config(_cfg(vertices=no_leak, require_invertible=False))
    np.testing.assert_array_equal(cfg.vertex_params.b, 0)


def test_nonsmooth_piecewise_coefficient_rejected():
    c = {"breaks": [0.5], "pieces": [[1.0, 1.0], [1.5, -1.0]]}
    with pytest.raises(ConfigError) as exc:
        parse_config(_cfg(edges=[{"c": c}]))
    assert any("diffusion regularity" in e for e in exc.value.errors)


def test_malformed_json():
    with pytest.raises(ConfigError) as exc:
        parse_config("{not json")
    assert "malformed JSON" in exc.value.errors[0]


def test_noise_marks_parse():
    noise = {"variant": "truncated_series", "bands": [
        {"rate": 1.0, "marks": {"type": "atoms", "node": 2, "values": [1, -1], "probs": [0.25, 0.75]}},
        {"rate": 2.0, "marks": {"type": "ball", "radius": 0.5}},
        {"rate": 3.0, "marks": {"type": "atoms", "points": [[1, 0], [0, 1]]}}]}
    cfg = parse_config(_cfg(noise=noise))
    assert len(cfg.noise.bands) == 3
    np.testing.assert_allclose(cfg.noise.bands[0].marks.points, [[0, 1], [0, -1]])
    with pytest.raises(ConfigError):
        parse_config(_cfg(noise={"bands": [{"rate": 1, "marks": {"type": "cauchy"}}]}))
    with pytest.raises(ConfigError):
        parse_config(_cfg(noise={"bands": [{"rate": 1, "marks": {"type": "gaussian", "std": 1}},
                                           {"rate": 1, "marks": {"type": "gaussian", "std": 1}}]}))


def test_yosida_scheme_requires_lambda():
    with pytest.raises(ConfigError):
        parse_config(_cfg(scheme={"drift_mode": "yosida_semi_implicit"}))
    cfg = parse_config(_cfg(scheme={"drift_mode": "yosida_semi_implicit", "yosida_lambda": 0.01}))
    assert cfg.scheme.yosida_lambda == 0.01


def test_polynomial_initial_data():
    cfg = parse_config(json.dumps({"graph": {"n_vertices": 3, "edges": [[1, 2], [2, 3]]},
                                   "initial": {"edges": [[0.0, 1.0], [1.0, 0.0, -1.0]]},
                                   "mesh": {"points_per_edge": 4}}))
    x0 = cfg.build_problem().x0
    mesh = cfg.build_mesh()
    np.testing.assert_allclose(mesh.vertex_values(x0), [0.0, 1.0, 0.0])
    np.testing.assert_allclose(mesh.edge_values(x0, 1), 1 - mesh.nodes**2)
