"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or disabled with
``DOAKIT_PURE_PYTHON=1``. Every function mirrors the signature of its
counterpart in ``_native.pyx``.
"""

import numpy as np

_EPS = np.finfo(float).eps


def diagonal_sums(B):
    """Sum a square matrix along its diagonals.

    Entry ``l + M - 1`` of the result holds ``sum(B[m, n] for m - n == l)``,
    for ``l = -(M-1) ... M-1``.
    """
    B = np.asarray(B, dtype=complex)
    M = B.shape[0]
    out = np.empty(2 * M - 1, dtype=complex)
    for l in range(-(M - 1), M):
        # np.trace(offset=k) sums B[i, i + k], i.e. m - n = -k
        out[l + M - 1] = np.trace(B, offset=-l)
    return out


def scan_quadratic(sums, psi):
    """Evaluate ``Re sum_l sums[l] exp(j l psi)`` for Hermitian-derived sums.

    Only the non-negative lags are read; the negative half is implied by
    conjugate symmetry. Horner's rule in ``z = exp(j psi)``.
    """
    sums = np.asarray(sums, dtype=complex)
    psi = np.asarray(psi, dtype=float)
    M = (sums.size + 1) // 2
    z = np.exp(1j * psi)
    acc = np.zeros(psi.shape, dtype=complex)
    for l in range(M - 1, 0, -1):
        acc = (acc + sums[M - 1 + l]) * z
    return sums[M - 1].real + 2.0 * acc.real


def local_maxima(power):
    """Indices ``i`` with ``p[i] > p[i-1]`` and ``p[i] >= p[i+1]``."""
    p = np.asarray(power, dtype=float)
    if p.size < 3:
        return np.empty(0, dtype=np.int64)
    mid = p[1:-1]
    mask = (mid > p[:-2]) & (mid >= p[2:])
    return (np.flatnonzero(mask) + 1).astype(np.int64)


def _ratio_and_bound(coeffs, z):
    # Inverse Newton ratio p'/p, log|p| and the Horner rounding bound (same scale as
    # the evaluated form). Outside the unit disc the reversed polynomial is
    # used so magnitudes stay bounded.
    n = coeffs.size - 1
    az = np.abs(z)
    inside = az <= 1.0
    w = np.where(inside, z, 1.0 / np.where(z == 0, 1.0, z))
    aw = np.abs(w)
    p = np.zeros(z.shape, dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    e = np.zeros(z.shape, dtype=float)
    rev = coeffs[::-1]
    for k in range(n + 1):
        c = np.where(inside, coeffs[k], rev[k])
        dp = dp * w + p
        p = p * w + c
        e = e * aw + np.abs(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_ratio = np.where(inside, dp / p, (n * p - w * dp) / (z * p))
        logp = np.log(np.abs(p)) + np.where(inside, 0.0, n * np.log(az))
    return inv_ratio, np.abs(p), e, logp


def aberth(coeffs, init, max_iter=500):
    """Aberth-Ehrlich simultaneous iteration (Jacobi sweep).

    Args:
        coeffs: complex coefficients, highest degree first, leading entry
            nonzero.
        init: initial approximations, one per root.
        max_iter: iteration cap.

    Returns:
        ``(roots, iterations, converged)``.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.array(init, dtype=complex)
    n = z.size
    tol = 4.0 * (n + 1) * _EPS
    active = np.ones(n, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        inv_ratio, ap, e, _ = _ratio_and_bound(coeffs, z)
        active &= ap > tol * e
        if not active.any():
            return z, it, True
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = 1.0 / (inv_ratio - s)
        step = np.where(active & np.isfinite(step), step, 0.0)
        z = z - step
        active &= np.abs(step) > 2.0 * _EPS * np.abs(z)
        if not active.any():
            return z, it, True
    return z, it, False


def newton_step(coeffs, roots):
    """One Newton correction per root, kept only if the residual does not grow."""
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.array(roots, dtype=complex)
    inv_ratio, _, _, logp = _ratio_and_bound(coeffs, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = 1.0 / inv_ratio
    cand = z - np.where(np.isfinite(step), step, 0.0)
    _, _, _, logp_new = _ratio_and_bound(coeffs, cand)
    return np.where(logp_new <= logp, cand, z)
