"""P1 Galerkin realization of the network diffusion operator with dynamic
vertex conditions.

The state space is the product of edge potentials and vertex potentials.  A
discrete state stores the edge interiors once per edge and the vertex values
once per vertex; the endpoint node of every incident edge *is* the vertex
degree of freedom, so node continuity holds by construction.

Global numbering: edge ``j`` interior node ``k`` (``1 <= k <= N-1``) has index
``j*(N-1) + k - 1``; vertex ``i`` has index ``m*(N-1) + i``.

The bilinear forms are

    K(u, v) = sum_j int_0^1 mu_j c_j u_j' v_j' dx + sum_i b_i p_i q_i
    M(u, v) = sum_j int_0^1 u_j v_j dx + sum_i p_i q_i

so the vertex block of ``M`` carries the identity on top of the consistent
edge-mass contributions of the endpoint hat functions.  The generator is
``A_h = -M^{-1} K``; it is self-adjoint and dissipative in the ``M`` inner
product because ``K`` is symmetric positive semidefinite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import cho_factor, cho_solve

from netfhn.graph import NetworkGraph, vertex_star

GAUSS_POINTS = 3


class DiscretizationError(ValueError):
    pass


class PiecewisePolynomial:
    """Piecewise polynomial on [0, 1] with ascending coefficients per piece.

    ``breaks`` are the interior breakpoints (possibly empty), so there are
    ``len(breaks) + 1`` pieces.
    """

    def __init__(self, pieces, breaks=()):
        self.pieces = [np.atleast_1d(np.asarray(p, dtype=float)) for p in pieces]
        self.breaks = np.asarray(breaks, dtype=float)
        if len(self.pieces) != len(self.breaks) + 1:
            raise DiscretizationError("need exactly len(breaks) + 1 polynomial pieces")
        if self.breaks.size and (np.any(np.diff(self.breaks) <= 0)
                                 or self.breaks[0] <= 0 or self.breaks[-1] >= 1):
            raise DiscretizationError("breakpoints must be increasing and inside (0, 1)")

    @classmethod
    def constant(cls, value):
        return cls([[float(value)]])

    @property
    def degree(self):
        return max(len(p) - 1 for p in self.pieces)

    def _piece_index(self, x):
        return np.searchsorted(self.breaks, x, side="right")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = self._piece_index(x)
        out = np.empty_like(x)
        for k, coef in enumerate(self.pieces):
            sel = idx == k
            out[sel] = P.polyval(x[sel], coef)
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        idx = self._piece_index(x)
        out = np.empty_like(x)
        for k, coef in enumerate(self.pieces):
            sel = idx == k
            out[sel] = P.polyval(x[sel], P.polyder(coef)) if len(coef) > 1 else 0.0
        return out

    def jumps_at_breaks(self):
        """Largest value and derivative mismatch across the breakpoints."""
        val = der = 0.0
        for k, x in enumerate(self.breaks):
            left, right = self.pieces[k], self.pieces[k + 1]
            val = max(val, abs(P.polyval(x, left) - P.polyval(x, right)))
            dl = P.polyval(x, P.polyder(left)) if len(left) > 1 else 0.0
            dr = P.polyval(x, P.polyder(right)) if len(right) > 1 else 0.0
            der = max(der, abs(dl - dr))
        return val, der


@dataclass(frozen=True)
class EdgeCoefficients:
    c: tuple  # one PiecewisePolynomial per edge
    mu: np.ndarray

    @classmethod
    def uniform(cls, n_edges, c=1.0, mu=1.0):
        return cls(tuple(PiecewisePolynomial.constant(c) for _ in range(n_edges)),
                   np.full(n_edges, float(mu)))


@dataclass(frozen=True)
class VertexParams:
    b: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        if b.shape != sigma.shape or b.ndim != 1:
            raise DiscretizationError("b and sigma must be 1-d arrays of equal length")
        if np.any(b < 0):
            raise DiscretizationError("leak rates b_i must be nonnegative")
        if np.any(sigma < 0):
            raise DiscretizationError("noise amplitudes sigma_i must be nonnegative")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class Mesh:
    graph: NetworkGraph
    points_per_edge: int
    edge_dofs: np.ndarray = field(repr=False)  # (m, N+1) global index of every edge node

    @property
    def n_cells(self):
        return self.points_per_edge

    @property
    def h(self):
        return 1.0 / self.points_per_edge

    @property
    def n_interior(self):
        return self.graph.n_edges * (self.points_per_edge - 1)

    @property
    def n_dofs(self):
        return self.n_interior + self.graph.n_vertices

    @property
    def vertex_dofs(self):
        return np.arange(self.n_interior, self.n_dofs)

    @property
    def interior_edge_index(self):
        """Edge index of every interior dof (length ``n_interior``)."""
        return np.repeat(np.arange(self.graph.n_edges), self.points_per_edge - 1)

    @property
    def interior_coordinates(self):
        x = np.arange(1, self.points_per_edge) * self.h
        return np.tile(x, self.graph.n_edges)

    @property
    def nodes(self):
        return np.linspace(0.0, 1.0, self.points_per_edge + 1)

    def describe_dof(self, k):
        """Human-readable (1-based) location of global dof ``k``."""
        k = int(k)
        if k >= self.n_interior:
            return f"vertex {k - self.n_interior + 1}"
        j, r = divmod(k, self.points_per_edge - 1)
        return f"edge {j + 1} at x={(r + 1) * self.h:.6g}"

    def edge_values(self, x, j):
        return np.asarray(x)[..., self.edge_dofs[j]]

    def vertex_values(self, x):
        return np.asarray(x)[..., self.n_interior:]

    def interpolate(self, edge_functions):
        """Nodal P1 interpolant of one callable per edge.

        Vertex values are read from the first incident edge; the caller is
        responsible for continuity at shared vertices.
        """
        x = np.empty(self.n_dofs)
        nodes = self.nodes
        for j, fun in enumerate(edge_functions):
            vals = np.broadcast_to(np.asarray(fun(nodes), dtype=float), nodes.shape)
            x[self.edge_dofs[j]] = vals
        for i in range(self.graph.n_vertices):
            j, end = vertex_star(self.graph, i)[0]
            vals = np.broadcast_to(np.asarray(edge_functions[j](nodes), dtype=float), nodes.shape)
            x[self.n_interior + i] = vals[-1 if end else 0]
        return x


class StateVector:
    """Discrete state ``(u, p)`` over a mesh's global numbering."""

    def __init__(self, mesh: Mesh, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (mesh.n_dofs,):
            raise DiscretizationError(
                f"state has shape {values.shape}, mesh expects ({mesh.n_dofs},)")
        self.mesh = mesh
        self.values = values

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def edge_values(self, j):
        return self.mesh.edge_values(self.values, j)

    @property
    def vertex_values(self):
        return self.mesh.vertex_values(self.values)


def build_mesh(g: NetworkGraph, points_per_edge: int) -> Mesh:
    N = int(points_per_edge)
    if N < 2:
        raise DiscretizationError(f"points_per_edge must be >= 2, got {points_per_edge}")
    m = g.n_edges
    n_interior = m * (N - 1)
    edge_dofs = np.empty((m, N + 1), dtype=int)
    for j, (tail, head) in enumerate(g.edges):
        edge_dofs[j, 0] = n_interior + tail
        edge_dofs[j, 1:N] = j * (N - 1) + np.arange(N - 1)
        edge_dofs[j, N] = n_interior + head
    edge_dofs.setflags(write=False)
    return Mesh(g, N, edge_dofs)


@dataclass(frozen=True)
class DiscreteGenerator:
    mesh: Mesh
    coefficients: EdgeCoefficients
    vertex_params: VertexParams
    M: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    K_edge: np.ndarray = field(repr=False)  # K without the vertex leak term
    _chol: tuple = field(repr=False, compare=False, default=None)

    @property
    def n_dofs(self):
        return self.mesh.n_dofs

    def m_inner(self, x, y):
        return float(np.asarray(x) @ self.M @ np.asarray(y))

    def m_norm(self, x):
        return float(np.sqrt(max(self.m_inner(x, x), 0.0)))

    def solve_mass(self, rhs):
        return cho_solve(self._chol, rhs)


def _check_dims(mesh, coeffs, vp):
    g = mesh.graph
    if len(coeffs.c) != g.n_edges or np.shape(coeffs.mu) != (g.n_edges,):
        raise DiscretizationError(
            f"edge coefficients given for {len(coeffs.c)} edges, graph has {g.n_edges}")
    if vp.b.shape != (g.n_vertices,):
        raise DiscretizationError(
            f"vertex params given for {vp.b.size} vertices, graph has {g.n_vertices}")
    if np.any(np.asarray(coeffs.mu) <= 0):
        raise DiscretizationError("edge weights mu_j must be positive")


def assemble_generator(mesh: Mesh, coeffs: EdgeCoefficients, vp: VertexParams) -> DiscreteGenerator:
    _check_dims(mesh, coeffs, vp)
    N, h = mesh.points_per_edge, mesh.h
    n = mesh.n_dofs
    gx, gw = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    left = np.arange(N) * h
    # quadrature points of every cell, shape (N, q)
    qx = left[:, None] + 0.5 * h * (gx[None, :] + 1.0)
    qw = 0.5 * h * gw

    K = np.zeros((n, n))
    M = np.zeros((n, n))
    local_stiff = np.array([[1.0, -1.0], [-1.0, 1.0]])
    local_mass = (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    for j in range(mesh.graph.n_edges):
        cvals = coeffs.c[j](qx.ravel()).reshape(qx.shape)
        if np.any(cvals <= 0):
            raise DiscretizationError(
                f"diffusion coefficient c on edge {j} is not positive at a quadrature point")
        cell_int = coeffs.mu[j] * (cvals @ qw) / h**2
        dofs = mesh.edge_dofs[j]
        for k in range(N):
            idx = dofs[k:k + 2]
            K[np.ix_(idx, idx)] += cell_int[k] * local_stiff
            M[np.ix_(idx, idx)] += local_mass
    K_edge = K.copy()
    vdofs = mesh.vertex_dofs
    K[vdofs, vdofs] += vp.b
    M[vdofs, vdofs] += 1.0
    for arr in (M, K, K_edge):
        arr.setflags(write=False)
    return DiscreteGenerator(mesh, coeffs, vp, M, K, K_edge, cho_factor(M))


def trace(mesh: Mesh, state) -> np.ndarray:
    """Vertex potentials ``p`` of a state."""
    x = np.asarray(state, dtype=float)
    if x.shape[-1] != mesh.n_dofs:
        raise DiscretizationError(f"state length {x.shape[-1]} != {mesh.n_dofs}")
    return x[..., mesh.n_interior:].copy()


def kirchhoff_flux(gen: DiscreteGenerator, state) -> np.ndarray:
    """Weighted co-normal flux into every vertex.

    Computed as the vertex rows of ``-K_edge x``: the Galerkin boundary term of
    the edge form.  At vertex ``i`` it approximates
    ``sum_j phi_ij mu_j c_j(v_i) u_j'(v_i)`` and is exact for piecewise-linear
    states with constant coefficients.  With it, the vertex rows of ``-K x``
    split as ``flux - b * p``.
    """
    x = np.asarray(state, dtype=float)
    if x.shape[-1] != gen.n_dofs:
        raise DiscretizationError(f"state length {x.shape[-1]} != {gen.n_dofs}")
    return -(x @ gen.K_edge.T)[..., gen.mesh.n_interior:]


def apply_generator(gen: DiscreteGenerator, state) -> np.ndarray:
    """``A_h x = -M^{-1} K x``."""
    x = np.asarray(state, dtype=float)
    if x.shape[0] != gen.n_dofs:
        raise DiscretizationError(f"state length {x.shape[0]} != {gen.n_dofs}")
    out = gen.solve_mass(-(gen.K @ x))
    if not np.all(np.isfinite(out)):
        raise np.linalg.LinAlgError("mass solve produced non-finite values")
    return out
