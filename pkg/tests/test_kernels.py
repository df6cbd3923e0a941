import numpy as np
import pytest

from doakit import kernels

BACKENDS = kernels.available_backends()


@pytest.fixture(params=BACKENDS)
def k(request):
    return kernels.get_backend(request.param)


def _random_hermitian(rng, M):
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return A @ A.conj().T


def test_native_backend_is_built():
    assert "native" in BACKENDS, "compiled extension missing; run pip install -e ."


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_diagonal_sums_matches_brute_force(k):
    rng = np.random.default_rng(0)
    B = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    want = np.array([sum(B[m, n] for m in range(5) for n in range(5) if m - n == l)
                     for l in range(-4, 5)])
    np.testing.assert_allclose(k.diagonal_sums(B), want, atol=1e-13)


@pytest.mark.parametrize("M", [2, 7, 33])
def test_scan_quadratic_matches_direct_quadratic_form(k, M):
    rng = np.random.default_rng(M)
    B = _random_hermitian(rng, M)
    psi = np.linspace(-np.pi, np.pi, 301)
    got = k.scan_quadratic(k.diagonal_sums(B), psi)
    A = np.exp(-1j * np.outer(np.arange(M), psi))
    want = np.einsum("mp,mn,np->p", A.conj(), B, A).real
    np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-10 * np.abs(B).max())


def test_scan_quadratic_handles_block_boundaries(k):
    # grid lengths around the compiled kernel's block size
    rng = np.random.default_rng(3)
    B = _random_hermitian(rng, 6)
    sums = k.diagonal_sums(B)
    for P in (1, 255, 256, 257, 513):
        psi = rng.uniform(-3, 3, P)
        np.testing.assert_allclose(k.scan_quadratic(sums, psi),
                                   kernels.get_backend("python").scan_quadratic(sums, psi),
                                   rtol=1e-12, atol=1e-12)


def test_local_maxima_rule(k):
    p = np.array([0.0, 1.0, 0.0, 2.0, 2.0, 1.0, 3.0])
    # strict on the left, non-strict on the right; endpoints never count
    assert list(k.local_maxima(p)) == [1, 3]
    assert list(k.local_maxima(np.ones(10))) == []
    assert list(k.local_maxima(np.array([1.0, 2.0]))) == []


def test_aberth_recovers_known_roots(k):
    true = np.array([1.5, -0.5 + 0.25j, 2j, -1.0, 0.3])
    coeffs = np.poly(true).astype(complex)
    n = true.size
    init = 1.2 * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    roots, it, converged = k.aberth(coeffs, init, 500)
    assert converged
    np.testing.assert_allclose(np.sort_complex(roots), np.sort_complex(true), atol=1e-10)


def test_newton_step_never_increases_residual(k):
    coeffs = np.poly([1.0, 2.0, 3.0]).astype(complex)
    z = np.array([1.1, 2.05, 2.9], dtype=complex)
    z1 = k.newton_step(coeffs, z)
    assert np.all(np.abs(np.polyval(coeffs, z1)) <= np.abs(np.polyval(coeffs, z)))


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    nat, py = kernels.get_backend("native"), kernels.get_backend("python")
    rng = np.random.default_rng(9)
    B = _random_hermitian(rng, 40)
    psi = rng.uniform(-np.pi, np.pi, 1000)
    np.testing.assert_allclose(nat.diagonal_sums(B), py.diagonal_sums(B), atol=1e-12)
    s = py.diagonal_sums(B)
    np.testing.assert_allclose(nat.scan_quadratic(s, psi), py.scan_quadratic(s, psi), rtol=1e-12)
    p = rng.standard_normal(500)
    np.testing.assert_array_equal(nat.local_maxima(p), py.local_maxima(p))
