"""FitzHugh-Nagumo reaction term, its monotone shift, resolvent and Yosida
regularization.

With ``f(u) = u (u - 1)(a - u)`` the derivative is bounded above by
``eta* = max_j (a_j^2 - a_j + 1) / 3``, so ``phi(u) = eta* u - f(u)`` is
nondecreasing and ``f = eta* I - phi`` splits the drift into a linear growth
part and a monotone part.  Regularization acts on ``phi`` only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

DRIFT_KINDS = ("fhn", "lipschitz_clipped", "linear")


@dataclass(frozen=True)
class FhnParams:
    """Per-edge thresholds ``a`` and the drift variant.

    ``kind="lipschitz_clipped"`` continues ``f`` linearly outside
    ``[-clip_radius, clip_radius]``; ``kind="linear"`` switches the reaction
    term off.  ``flip_sign`` negates the drift and exists only to build
    anti-dissipative negative controls.
    """

    a: np.ndarray
    kind: str = "fhn"
    clip_radius: float = 3.0
    flip_sign: bool = False

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if a.ndim != 1 or a.size == 0:
            raise ValueError("need one threshold a_j per edge")
        if np.any((a <= 0) | (a >= 1)):
            raise ValueError(f"thresholds a_j must lie in (0, 1), got {a.tolist()}")
        if self.kind not in DRIFT_KINDS:
            raise ValueError(f"unknown drift kind {self.kind!r}; expected one of {DRIFT_KINDS}")
        if self.clip_radius <= 0:
            raise ValueError("clip_radius must be positive")
        object.__setattr__(self, "a", a)


def _cubic(u, a):
    return u * (u - 1.0) * (a - u)


def _cubic_prime(u, a):
    return -3.0 * u * u + 2.0 * (1.0 + a) * u - a


def reaction(params: FhnParams, a, u):
    """Reaction term for thresholds ``a`` (broadcast against ``u``)."""
    u = np.asarray(u, dtype=float)
    if params.kind == "linear":
        out = np.zeros(np.broadcast(u, a).shape)
    elif params.kind == "fhn":
        out = _cubic(u, a)
    else:
        R = params.clip_radius
        uc = np.clip(u, -R, R)
        out = _cubic(uc, a) + _cubic_prime(uc, a) * (u - uc)
    return -out if params.flip_sign else out


def reaction_prime(params: FhnParams, a, u):
    u = np.asarray(u, dtype=float)
    if params.kind == "linear":
        out = np.zeros(np.broadcast(u, a).shape)
    elif params.kind == "fhn":
        out = _cubic_prime(u, a)
    else:
        R = params.clip_radius
        out = _cubic_prime(np.clip(u, -R, R), a)
    return -out if params.flip_sign else out


def fhn_eval(params: FhnParams, j: int, u):
    """``f_j(u) = u (u - 1)(a_j - u)``."""
    return _cubic(np.asarray(u, dtype=float), params.a[j])


def eta_star(params: FhnParams) -> float:
    """Smallest ``eta`` making every ``f_j(u) - eta u`` nonincreasing.

    The closed form is cross-checked against a numerical maximization of
    ``f_j'``; disagreement beyond 1e-10 raises.
    """
    if params.a.size == 0:
        raise ValueError("no edges")
    if params.kind == "linear":
        return 0.0
    closed = float(np.max((params.a**2 - params.a + 1.0) / 3.0))
    if params.flip_sign:
        return closed
    grid = np.linspace(-10.0, 10.0, 2001)
    numeric = -np.inf
    for a in params.a:
        k = int(np.argmax(_cubic_prime(grid, a)))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        res = minimize_scalar(lambda u: -_cubic_prime(u, a), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12})
        numeric = max(numeric, -res.fun)
    if abs(numeric - closed) > 1e-10:
        raise ArithmeticError(f"eta* closed form {closed} disagrees with numeric maximum {numeric}")
    return closed


@dataclass(frozen=True)
class MonotoneShift:
    params: FhnParams
    eta_star: float

    def phi(self, a, u):
        return self.eta_star * np.asarray(u, dtype=float) - reaction(self.params, a, u)

    def phi_prime(self, a, u):
        return self.eta_star - reaction_prime(self.params, a, u)


def monotone_shift(params: FhnParams) -> MonotoneShift:
    if params.flip_sign:
        raise ValueError("a sign-flipped drift has no monotone shift")
    return MonotoneShift(params, eta_star(params))


def resolvent_many(shift: MonotoneShift, lam: float, a, v, rtol=1e-12, max_iter=200):
    """Solve ``u + lam * phi(u) = v`` elementwise.

    ``phi(0) = 0`` and ``phi`` is nondecreasing, so the root lies between 0
    and ``v``.  Newton steps are accepted while they stay inside the current
    bracket; otherwise the bracket is bisected.
    """
    if lam <= 0:
        raise ValueError(f"resolvent parameter must be positive, got {lam}")
    v = np.asarray(v, dtype=float)
    a = np.broadcast_to(a, v.shape)
    lo = np.minimum(v, 0.0)
    hi = np.maximum(v, 0.0)
    u = v / (1.0 + lam * np.maximum(shift.phi_prime(a, 0.0), 0.0))
    tol = rtol * (1.0 + np.abs(v))
    for _ in range(max_iter):
        g = u + lam * shift.phi(a, u) - v
        done = np.abs(g) <= tol
        if np.all(done):
            return u
        hi = np.where(g > 0, u, hi)
        lo = np.where(g < 0, u, lo)
        dg = 1.0 + lam * shift.phi_prime(a, u)
        newton = u - g / dg
        inside = (newton > lo) & (newton < hi)
        u = np.where(done, u, np.where(inside, newton, 0.5 * (lo + hi)))
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(hi))):
            return u
    raise ArithmeticError("resolvent iteration did not converge")


def resolvent(shift: MonotoneShift, lam: float, j: int, v: float) -> float:
    """``(1 + lam phi_j)^{-1}(v)`` for a single value."""
    return float(resolvent_many(shift, lam, shift.params.a[j], np.float64(v)))


def yosida_many(shift: MonotoneShift, lam: float, a, v):
    return shift.phi(a, resolvent_many(shift, lam, a, v))


def yosida_eval(shift: MonotoneShift, lam: float, j: int, v: float) -> float:
    """Yosida approximation ``phi_lam(v) = phi(J_lam v) = (v - J_lam v) / lam``."""
    return float(yosida_many(shift, lam, shift.params.a[j], np.float64(v)))


def drift_apply(params: FhnParams, shift: MonotoneShift | None, mesh, state, lam: float = 0.0):
    """Reaction term embedded in the state space.

    Edge interior entries carry ``f_j(u)`` (``lam == 0``) or the regularized
    ``eta* u - phi_lam(u)`` (``lam > 0``); vertex entries are zero.
    """
    x = np.asarray(state, dtype=float)
    if x.shape[0] != mesh.n_dofs:
        raise ValueError(f"state length {x.shape[0]} != {mesh.n_dofs}")
    out = np.zeros_like(x)
    ni = mesh.n_interior
    a = params.a[mesh.interior_edge_index]
    if x.ndim > 1:
        a = a.reshape((-1,) + (1,) * (x.ndim - 1))
    u = x[:ni]
    if lam == 0:
        out[:ni] = reaction(params, a, u)
    else:
        if lam < 0:
            raise ValueError("lam must be nonnegative")
        out[:ni] = shift.eta_star * u - yosida_many(shift, lam, a, u)
    return out
