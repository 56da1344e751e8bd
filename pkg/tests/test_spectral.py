import numpy as np
import pytest
import scipy.linalg

from netfhn.spectral import decompose, phi1, semigroup_apply, spectral_bound

from conftest import PATH_EDGES, STAR_EDGES, TRIANGLE_EDGES, make_generator


def test_kernel_without_leak():
    dec = decompose(make_generator(2, PATH_EDGES, N=8, b=[0, 0]))
    assert abs(spectral_bound(dec)) <= 1e-10
    v = dec.eigenvectors[:, 0]
    np.testing.assert_allclose(v / v[0], 1.0, atol=1e-8)


@pytest.mark.parametrize("N", [8, 16])
def test_leak_makes_spectrum_negative(N):
    dec = decompose(make_generator(2, PATH_EDGES, N=N, b=[1, 1]))
    assert np.all(dec.eigenvalues < 0)
    assert dec.eigenvalues.size == dec.n_dofs
    # compare with a dense nonsymmetric eigensolve of A_h
    A = -np.linalg.solve(dec.generator.M, dec.generator.K)
    oracle = np.sort(np.linalg.eigvals(A).real)[::-1]
    np.testing.assert_allclose(dec.eigenvalues, oracle, rtol=1e-8, atol=1e-8)


def test_leading_eigenvalue_converges_with_mesh():
    lam = [spectral_bound(decompose(make_generator(2, PATH_EDGES, N=N, b=[1, 1]))) for N in (8, 16, 32)]
    assert abs(lam[1] - lam[2]) < abs(lam[0] - lam[1])
    assert abs(lam[1] - lam[2]) / abs(lam[0] - lam[1]) == pytest.approx(0.25, abs=0.05)


def test_ordering_and_orthonormality(triangle_gen):
    dec = decompose(triangle_gen)
    assert np.all(np.diff(dec.eigenvalues) <= 0)
    V, M = dec.eigenvectors, triangle_gen.M
    np.testing.assert_allclose(V.T @ M @ V, np.eye(dec.n_dofs), atol=1e-10)


def test_bound_monotone_in_leak(rng):
    for _ in range(5):
        b = rng.uniform(0, 2, size=4)
        bump = b + rng.uniform(0.01, 1, size=4)
        lo = spectral_bound(decompose(make_generator(4, STAR_EDGES, b=b)))
        hi = spectral_bound(decompose(make_generator(4, STAR_EDGES, b=bump)))
        assert lo < 0 and hi <= lo


def test_semigroup_identity_and_law(triangle_gen, rng):
    dec = decompose(triangle_gen)
    x = rng.normal(size=dec.n_dofs)
    np.testing.assert_allclose(semigroup_apply(dec, 0.0, x), x, atol=1e-12)
    two = semigroup_apply(dec, 0.3, semigroup_apply(dec, 0.2, x))
    one = semigroup_apply(dec, 0.5, x)
    assert np.linalg.norm(two - one) <= 1e-10 * np.linalg.norm(one)
    expm = scipy.linalg.expm(-0.5 * np.linalg.solve(triangle_gen.M, triangle_gen.K))
    np.testing.assert_allclose(one, expm @ x, atol=1e-10)
    with pytest.raises(ValueError):
        semigroup_apply(dec, -1.0, x)


def test_exponential_decay_and_contraction(rng):
    gen = make_generator(2, PATH_EDGES, N=8, b=[1, 1])
    dec = decompose(gen)
    lam1 = spectral_bound(dec)
    for _ in range(20):
        x = rng.normal(size=gen.n_dofs)
        assert gen.m_norm(semigroup_apply(dec, 10.0, x)) <= np.exp(10 * lam1) * gen.m_norm(x) * (1 + 1e-10)
        for t in (0.01, 0.1, 1.0):
            assert gen.m_norm(semigroup_apply(dec, t, x)) <= gen.m_norm(x) * (1 + 1e-12)


def test_modal_norm_is_m_norm(triangle_gen, rng):
    dec = decompose(triangle_gen)
    x = rng.normal(size=dec.n_dofs)
    assert np.linalg.norm(dec.modal(x)) == pytest.approx(triangle_gen.m_norm(x), rel=1e-12)
    np.testing.assert_allclose(dec.nodal(dec.modal(x)), x, atol=1e-12)


def test_phi1():
    z = np.array([0.0, 1e-12, -1.0, 2.0, -50.0])
    np.testing.assert_allclose(phi1(z), [1.0, 1.0 + 5e-13, 1 - np.exp(-1), (np.exp(2) - 1) / 2, (1 - np.exp(-50)) / 50],
                               rtol=1e-14)


def test_dense_spectra_on_star_and_triangle():
    for n, edges in ((4, STAR_EDGES), (3, TRIANGLE_EDGES)):
        gen = make_generator(n, edges, N=6, b=np.linspace(0, 1, n))
        w = scipy.linalg.eigvalsh(gen.K, gen.M)
        np.testing.assert_allclose(decompose(gen).eigenvalues, -w, atol=1e-10)
