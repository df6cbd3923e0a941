"""Dense complex linear algebra shared by the estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

_EPS = np.finfo(float).eps


class SingularCovarianceError(np.linalg.LinAlgError):
    """Raised when a covariance cannot be inverted at working precision."""


class RankDeficientError(np.linalg.LinAlgError):
    pass


def _check_hermitian(R, rtol=1e-10):
    R = np.asarray(R, dtype=complex)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    scale = max(np.abs(R).max(initial=0.0), 1e-300)
    if np.abs(R - R.conj().T).max(initial=0.0) > rtol * scale:
        raise ValueError("matrix is not Hermitian")
    return R


def hermitian_eig(R) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in descending
        order; ties keep LAPACK's output order reversed consistently.
    """
    R = _check_hermitian(R)
    w, V = np.linalg.eigh(R)
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True)
class SubspaceDecomposition:
    eigenvalues: np.ndarray
    signal_basis: np.ndarray
    noise_basis: np.ndarray
    noise_power_estimate: float

    @property
    def num_sources(self) -> int:
        return self.signal_basis.shape[1]

    def noise_projector(self) -> np.ndarray:
        Qn = self.noise_basis
        return Qn @ Qn.conj().T


def partition_subspaces(eigenvalues, eigenvectors, num_sources: int) -> SubspaceDecomposition:
    """Split a descending eigendecomposition into signal and noise subspaces."""
    M = eigenvectors.shape[0]
    if not 1 <= num_sources < M:
        raise ValueError(f"need 1 <= num_sources < M={M}, got {num_sources}")
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    return SubspaceDecomposition(
        eigenvalues=eigenvalues,
        signal_basis=eigenvectors[:, :num_sources],
        noise_basis=eigenvectors[:, num_sources:],
        noise_power_estimate=float(eigenvalues[num_sources:].mean()),
    )


def subspaces(R, num_sources: int) -> SubspaceDecomposition:
    """Shorthand for ``partition_subspaces(*hermitian_eig(R), num_sources)``."""
    return partition_subspaces(*hermitian_eig(R), num_sources)


def invert_hermitian(R, loading: float = 0.0) -> np.ndarray:
    """Invert ``R + loading * (trace(R)/M) * I``.

    Raises:
        SingularCovarianceError: if the (loaded) matrix is singular or too
            ill-conditioned to invert reliably.
    """
    if loading < 0:
        raise ValueError("loading must be non-negative")
    R = _check_hermitian(R)
    M = R.shape[0]
    if loading:
        R = R + loading * (np.trace(R).real / M) * np.eye(M)
    w, V = np.linalg.eigh(R)
    wmax = np.abs(w).max(initial=0.0)
    if wmax == 0 or np.abs(w).min() <= M * _EPS * wmax:
        raise SingularCovarianceError(
            "covariance is singular to working precision; use diagonal loading"
        )
    inv = (V / w) @ V.conj().T
    return 0.5 * (inv + inv.conj().T)


def least_squares(A, B) -> np.ndarray:
    """Minimise ``||A X - B||_F`` for full-column-rank ``A``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[0] < A.shape[1]:
        raise ValueError("least_squares needs at least as many rows as columns")
    X, _, rank, _ = np.linalg.lstsq(A, B, rcond=None)
    if rank < A.shape[1]:
        raise RankDeficientError(f"matrix has rank {rank} < {A.shape[1]} columns")
    return X


# -- polynomial roots ---------------------------------------------------------

def _initial_points(coeffs: np.ndarray) -> np.ndarray:
    # points on a circle whose radius is the geometric mean of the root moduli
    n = coeffs.size - 1
    r = abs(coeffs[-1] / coeffs[0]) ** (1.0 / n)
    k = np.arange(n)
    return r * np.exp(1j * (2.0 * np.pi * k / n + 0.4))


def _residual_ok(coeffs, roots, rtol) -> bool:
    # |p(z)| / max(1,|z|)^n, via the reversed polynomial at 1/z outside the unit circle
    if not np.all(np.isfinite(roots)):
        return False
    big = np.abs(roots) > 1.0
    r = np.empty(roots.size)
    r[~big] = np.abs(np.polyval(coeffs, roots[~big]))
    r[big] = np.abs(np.polyval(coeffs[::-1], 1.0 / roots[big]))
    return bool(np.all(r <= rtol * np.abs(coeffs).max()))


def polynomial_roots(coeffs, max_iter: int = 500) -> np.ndarray:
    """All roots of a complex polynomial, with multiplicity.

    Uses Aberth-Ehrlich simultaneous iteration followed by one Newton
    polishing step; falls back to companion-matrix eigenvalues if the
    iteration does not converge.

    Args:
        coeffs: coefficients, highest degree first. The leading coefficient
            must be nonzero.
        max_iter: iteration cap for the simultaneous iteration.

    Returns:
        ``n`` complex roots, unordered.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if c.size == 0 or not np.any(c):
        raise ValueError("zero polynomial has no well-defined roots")
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if c.size < 2:
        raise ValueError("polynomial degree must be at least 1")
    nz = np.flatnonzero(c)
    trailing = c.size - 1 - nz[-1]
    c = c[: nz[-1] + 1] / c[0]
    zeros = np.zeros(trailing, dtype=complex)
    if c.size == 1:
        return zeros
    roots, _, converged = kernels.aberth(c, _initial_points(c), max_iter)
    roots = kernels.newton_step(c, roots)
    if not converged or not np.all(np.isfinite(roots)) or not _residual_ok(c, roots, 1e-6):
        roots = np.roots(c).astype(complex)
    return np.concatenate([roots, zeros])


# -- transforms ---------------------------------------------------------------

def dft(x, n_fft: int) -> np.ndarray:
    """Zero-padded DFT with the ``exp(-j 2 pi m l / n_fft)`` kernel.

    ``x`` may be a vector or an ``M x S`` matrix (transform along axis 0).
    """
    x = np.asarray(x, dtype=complex)
    M = x.shape[0]
    if n_fft < M:
        raise ValueError(f"n_fft={n_fft} is smaller than the input length {M}")
    if n_fft < 1 or n_fft & (n_fft - 1):
        raise ValueError(f"n_fft must be a power of two, got {n_fft}")
    return np.fft.fft(x, n=n_fft, axis=0)


def forward_backward_average(X) -> np.ndarray:
    """``[X, Pi_M conj(X) Pi_S]``: append the conjugated doubly-reversed block."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    return np.hstack([X, X[::-1, ::-1].conj()])


@dataclass(frozen=True)
class ExchangeMatrix:
    """Exchange (anti-identity) matrix ``Pi_p``, kept implicit."""

    order: int

    def apply(self, x, axis: int = 0) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[axis] != self.order:
            raise ValueError("dimension mismatch")
        return np.flip(x, axis=axis)

    def matrix(self) -> np.ndarray:
        return np.eye(self.order)[::-1]


@dataclass(frozen=True)
class PiRealTransform:
    """Sparse unitary left Pi-real matrix ``Q_p``."""

    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")

    @property
    def parity(self) -> str:
        return "even" if self.order % 2 == 0 else "odd"

    def matrix(self) -> np.ndarray:
        n = self.order // 2
        I = np.eye(n)
        Pi = I[::-1]
        if self.order % 2 == 0:
            Q = np.block([[I, 1j * I], [Pi, -1j * Pi]])
        else:
            z = np.zeros((n, 1))
            Q = np.block([
                [I, z, 1j * I],
                [z.T, np.sqrt(2.0) * np.ones((1, 1)), z.T],
                [Pi, z, -1j * Pi],
            ])
        return Q / np.sqrt(2.0)


def pi_real_transform(p: int) -> PiRealTransform:
    return PiRealTransform(p)


def selection_matrices(M: int, shift: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Real selection pair ``K1 = 2 Re(Q_m^H J2 Q_M)``, ``K2 = 2 Im(...)``.

    ``J2`` selects the last ``m = M - shift`` elements.
    """
    if M < 2 or not 1 <= shift < M:
        raise ValueError("need M >= 2 and 1 <= shift < M")
    m = M - shift
    J2 = np.eye(M)[shift:]
    G = PiRealTransform(m).matrix().conj().T @ J2 @ PiRealTransform(M).matrix()
    return 2.0 * G.real, 2.0 * G.imag
