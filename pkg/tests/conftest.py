import numpy as np
import pytest

from netfhn.discretization import EdgeCoefficients, VertexParams, assemble_generator, build_mesh
from netfhn.graph import build_network
from netfhn.integrator import ProblemSpec
from netfhn.levy import AtomMarks, Band, LevyMeasureSpec
from netfhn.nonlinearity import FhnParams, monotone_shift
from netfhn.spectral import decompose

PATH_EDGES = [(0, 1)]
TRIANGLE_EDGES = [(0, 1), (0, 2), (1, 2)]
STAR_EDGES = [(0, 1), (0, 2), (0, 3)]


def make_generator(n_vertices, edges, N=8, c=1.0, mu=1.0, b=None, sigma=None, coefficients=None):
    g = build_network(n_vertices, edges)
    mesh = build_mesh(g, N)
    b = np.ones(n_vertices) if b is None else np.asarray(b, dtype=float)
    sigma = np.ones(n_vertices) if sigma is None else np.asarray(sigma, dtype=float)
    coeffs = coefficients or EdgeCoefficients.uniform(g.n_edges, c, mu)
    return assemble_generator(mesh, coeffs, VertexParams(b, sigma))


def atom_noise(n_vertices, rate=2.0, node=0, values=(1.0, -1.0)):
    pts = np.zeros((len(values), n_vertices))
    pts[:, node] = values
    return LevyMeasureSpec((Band(rate, AtomMarks(pts)),))


def make_problem(gen, a=0.5, kind="fhn", noise=None, x0=None, horizon=1.0, flip_sign=False, sigma=None):
    n = gen.mesh.graph.n_vertices
    params = FhnParams(np.full(gen.mesh.graph.n_edges, a), kind=kind, flip_sign=flip_sign)
    shift = None if kind == "linear" or flip_sign else monotone_shift(params)
    noise = atom_noise(n) if noise is None else noise
    x0 = np.zeros(gen.n_dofs) if x0 is None else x0
    sigma = gen.vertex_params.sigma if sigma is None else np.asarray(sigma, dtype=float)
    return ProblemSpec(decompose(gen), params, shift, sigma, noise, x0, horizon)


@pytest.fixture
def triangle_gen():
    return make_generator(3, TRIANGLE_EDGES, N=8, b=[1.0, 0.0, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
