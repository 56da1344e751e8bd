import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netfhn.discretization import build_mesh
from netfhn.graph import build_network
from netfhn.nonlinearity import (FhnParams, drift_apply, eta_star, fhn_eval, monotone_shift, reaction,
                                 resolvent, resolvent_many, yosida_eval)

from conftest import TRIANGLE_EDGES


def _bisect(fun, lo, hi, tol=1e-14):
    flo = fun(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (fun(mid) > 0) == (flo > 0):
            lo, flo = mid, fun(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_fhn_values():
    p = FhnParams(np.array([0.5]))
    for u in (0.0, 1.0, 0.5):
        assert fhn_eval(p, 0, u) == 0
    assert fhn_eval(FhnParams(np.array([0.25])), 0, 0.5) == pytest.approx(0.0625, abs=1e-15)
    assert fhn_eval(p, 0, -10.0) > 0


@pytest.mark.parametrize("a, expected", [([0.5], 0.25), ([0.2], 0.28), ([0.5, 0.2], 0.28)])
def test_eta_star(a, expected):
    assert eta_star(FhnParams(np.array(a))) == pytest.approx(expected, abs=1e-12)
    u = np.linspace(-10, 10, 200_001)
    grid_max = max(np.max(-3 * u**2 + 2 * (1 + aj) * u - aj) for aj in a)
    assert grid_max == pytest.approx(expected, abs=1e-8)


def test_eta_star_closed_forms_agree():
    for a in np.linspace(0.05, 0.95, 19):
        assert (a**2 - a + 1) / 3 == pytest.approx((a**3 + 1) / (3 * (a + 1)), rel=1e-14)


def test_one_sided_lipschitz():
    a = 0.3
    p = FhnParams(np.array([a]))
    eta = eta_star(p)
    u = np.linspace(-5, 5, 200)
    U, W = np.meshgrid(u, u)
    lhs = (reaction(p, a, U) - reaction(p, a, W)) * (U - W)
    assert np.all(lhs <= eta * (U - W) ** 2 + 1e-9)


def test_clipped_drift_is_lipschitz_and_agrees_inside():
    p = FhnParams(np.array([0.5]), kind="lipschitz_clipped", clip_radius=2.0)
    full = FhnParams(np.array([0.5]))
    inside = np.linspace(-2, 2, 41)
    np.testing.assert_allclose(reaction(p, 0.5, inside), reaction(full, 0.5, inside))
    u = np.linspace(-50, 50, 2001)
    slopes = np.abs(np.diff(reaction(p, 0.5, u)) / np.diff(u))
    assert slopes.max() < 20
    assert np.all(reaction(FhnParams(np.array([0.5]), kind="linear"), 0.5, u) == 0)


def test_resolvent_examples():
    shift = monotone_shift(FhnParams(np.array([0.5])))
    assert resolvent(shift, 1.0, 0, 0.0) == 0.0
    for v in (-1.0, 0.3, 2.0):
        assert abs(resolvent(shift, 1e-8, 0, v) - v) <= 1e-6
    g = lambda u: u + 1.0 * (0.25 * u - u * (u - 1) * (0.5 - u)) - 1.0
    assert resolvent(shift, 1.0, 0, 1.0) == pytest.approx(_bisect(g, -10, 10), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.01, 0.99), lam=st.floats(1e-6, 10.0), v=st.floats(-20, 20))
def test_resolvent_solves_equation(a, lam, v):
    shift = monotone_shift(FhnParams(np.array([a])))
    u = float(resolvent_many(shift, lam, a, np.float64(v)))
    assert abs(u + lam * shift.phi(a, u) - v) <= 1e-11 * (1 + abs(v))
    assert min(0, v) <= u <= max(0, v)


def test_resolvent_is_nonexpansive():
    shift = monotone_shift(FhnParams(np.array([0.3])))
    v = np.linspace(-5, 5, 501)
    u = resolvent_many(shift, 0.7, 0.3, v)
    assert np.all(np.abs(np.diff(u)) <= np.diff(v) + 1e-12)


def test_yosida_examples():
    shift = monotone_shift(FhnParams(np.array([0.5])))
    assert yosida_eval(shift, 0.1, 0, 0.0) == 0.0
    grid = np.linspace(-3, 3, 100)
    vals = [yosida_eval(shift, 0.1, 0, v) for v in grid]
    assert np.all(np.diff(vals) >= 0)
    assert yosida_eval(shift, 1e-4, 0, 0.7) == pytest.approx(shift.phi(0.5, 0.7), abs=1e-3)
    lam, v = 0.2, 1.3
    j = resolvent(shift, lam, 0, v)
    assert yosida_eval(shift, lam, 0, v) == pytest.approx((v - j) / lam, rel=1e-10)


def test_sign_flip_has_no_monotone_shift():
    with pytest.raises(ValueError):
        monotone_shift(FhnParams(np.array([0.5]), flip_sign=True))


@pytest.mark.parametrize("a", [0.0, 1.0, 1.2, -0.1])
def test_threshold_range_enforced(a):
    with pytest.raises(ValueError):
        FhnParams(np.array([a]))


def test_drift_apply(rng):
    mesh = build_mesh(build_network(3, TRIANGLE_EDGES), 6)
    p = FhnParams(np.array([0.5, 0.2, 0.7]))
    shift = monotone_shift(p)
    np.testing.assert_array_equal(drift_apply(p, shift, mesh, np.zeros(mesh.n_dofs)), 0.0)
    x = rng.uniform(-1, 2, size=mesh.n_dofs)
    out = drift_apply(p, shift, mesh, x)
    for k in range(mesh.n_interior):
        assert out[k] == pytest.approx(fhn_eval(p, mesh.interior_edge_index[k], x[k]), rel=1e-14)
    np.testing.assert_array_equal(out[mesh.vertex_dofs], 0.0)
    devs = [np.max(np.abs(drift_apply(p, shift, mesh, x, lam) - out)) for lam in (1e-1, 1e-2, 1e-3)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < devs[0] / 50
