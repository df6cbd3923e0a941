"""Search-free estimators: ESPRIT, Unitary-ESPRIT and Root-MUSIC.

With the steering convention ``a_k = exp(-j psi k)`` the rotational operator
of a shift-invariant pair has eigenvalues ``exp(-j psi)``, and the Root-MUSIC
polynomial ``sum_l abar_l z^l`` vanishes at ``z = exp(j psi)``; the angle maps
below follow from that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .array_model import UlaGeometry, sample_covariance
from .linalg import (
    SubspaceDecomposition,
    forward_backward_average,
    hermitian_eig,
    least_squares,
    PiRealTransform,
    polynomial_roots,
    selection_matrices,
    subspaces,
)
from .spectral import DoaEstimate

# Unitary-ESPRIT eigenvalues with a larger imaginary part are flagged
IMAG_TOL = 1e-6
# Root-MUSIC admissibility and conjugate-reciprocal matching tolerances
UNIT_CIRCLE_TOL = 1e-6
PAIR_TOL = 1e-5


def _phase_to_angles(method: str, phase, aperture: float, num_sources: int,
                     warnings: list[str]) -> DoaEstimate:
    """Map per-source phases ``2 pi aperture sin(theta)`` to sorted angles."""
    s = np.asarray(phase, dtype=float) / (2.0 * np.pi * aperture)
    ok = np.abs(s) <= 1.0
    for v in s[~ok]:
        warnings.append(f"phase maps outside the visible region (sin={v:.6g})")
    angles = np.sort(np.rad2deg(np.arcsin(s[ok])))
    return DoaEstimate(
        method=method,
        angles_deg=angles,
        underdetected=num_sources - angles.size,
        warnings=tuple(warnings),
    )


def _check_sources(num_sources: int, M: int, shift: int = 1):
    if not 1 <= num_sources <= M - shift:
        raise ValueError(f"num_sources must be in [1, {M - shift}], got {num_sources}")


def esprit_phases(Qs, shift: int = 1) -> np.ndarray:
    """Eigenvalues of the least-squares rotational operator of ``Qs``."""
    E1, E2 = Qs[:-shift], Qs[shift:]
    return np.linalg.eigvals(least_squares(E1, E2))


def esprit(R, geometry: UlaGeometry, num_sources: int) -> DoaEstimate:
    """Least-squares ESPRIT on maximally overlapping subarrays.

    Args:
        R: ``M x M`` covariance.
        geometry: array; its subarray displacement sets the row shift.
        num_sources: number of sources ``L``.
    """
    M, shift = geometry.num_elements, geometry.subarray_shift
    _check_sources(num_sources, M, shift)
    w, V = hermitian_eig(R)
    phi = esprit_phases(V[:, :num_sources], shift)
    return _phase_to_angles("esprit", -np.angle(phi), geometry.subarray_displacement,
                            num_sources, [])


def _unitary_core(R, geometry: UlaGeometry, num_sources: int) -> DoaEstimate:
    M, shift = geometry.num_elements, geometry.subarray_shift
    Q = PiRealTransform(M).matrix()
    T = (Q.conj().T @ R @ Q).real
    _, V = hermitian_eig(0.5 * (T + T.T))
    Es = V[:, :num_sources]
    K1, K2 = selection_matrices(M, shift)
    gamma = least_squares(K1 @ Es, K2 @ Es)
    phi = np.linalg.eigvals(gamma)
    warnings = []
    if np.any(np.abs(phi.imag) > IMAG_TOL):
        warnings.append(
            f"complex rotational eigenvalues (max |imag|={np.abs(phi.imag).max():.3g})"
        )
    mu = 2.0 * np.arctan(phi.real)
    return _phase_to_angles("uesprit", -mu, geometry.subarray_displacement, num_sources, warnings)


def unitary_esprit(X, geometry: UlaGeometry, num_sources: int) -> DoaEstimate:
    """Unitary-ESPRIT from snapshots.

    Forward-backward averages the data, maps the covariance to a real
    symmetric matrix with the Pi-real transform, and solves the real-valued
    shift invariance equation. Angles follow from ``mu = 2 arctan(phi)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    _check_sources(num_sources, geometry.num_elements, geometry.subarray_shift)
    Xf = forward_backward_average(X)
    # 1/S over 2S columns; the factor of two does not move the subspace
    R = Xf @ Xf.conj().T / X.shape[1]
    return _unitary_core(0.5 * (R + R.conj().T), geometry, num_sources)


def unitary_esprit_covariance(R, geometry: UlaGeometry, num_sources: int) -> DoaEstimate:
    """Unitary-ESPRIT from a covariance (exact-covariance mode)."""
    R = np.asarray(R, dtype=complex)
    _check_sources(num_sources, geometry.num_elements, geometry.subarray_shift)
    Rfb = R + R[::-1, ::-1].conj()
    return _unitary_core(0.5 * (Rfb + Rfb.conj().T), geometry, num_sources)


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    selected: np.ndarray


def root_music_polynomial(sub: SubspaceDecomposition) -> np.ndarray:
    """Monic coefficients (highest first) of ``sum_l abar_l z^(l + M - 1)``."""
    sums = kernels.diagonal_sums(sub.noise_projector())
    coeffs = sums[::-1]
    return coeffs / coeffs[0]


def _polish_double_root(coeffs, z0, iters: int = 4) -> complex:
    # a double root of p is a simple root of p'
    dp = np.polyder(np.asarray(coeffs, dtype=complex))
    z = np.array([z0], dtype=complex)
    for _ in range(iters):
        z = kernels.newton_step(dp, z)
    return complex(z[0])


def select_roots(roots, num_sources: int, coeffs=None) -> np.ndarray:
    """Pick the admissible roots nearest the unit circle.

    Roots outside ``|z| <= 1 + UNIT_CIRCLE_TOL`` are dropped and a root whose
    conjugate-reciprocal partner was already taken counts once. When the two
    members of a pair coincide to within ``PAIR_TOL`` they are a double root
    split by rounding; with ``coeffs`` given, its centre is recovered by
    Newton iteration on the derivative.
    """
    roots = np.asarray(roots, dtype=complex)
    cand = roots[np.abs(roots) <= 1.0 + UNIT_CIRCLE_TOL]
    cand = cand[np.argsort(np.abs(1.0 - np.abs(cand)), kind="stable")]
    chosen: list[complex] = []
    mates: list[complex | None] = []
    for z in cand:
        partner = 1.0 / np.conj(z) if z != 0 else np.inf
        hit = [i for i, c in enumerate(chosen) if abs(partner - c) < PAIR_TOL]
        if hit:
            if mates[hit[0]] is None:
                mates[hit[0]] = z
            continue
        if len(chosen) < num_sources:
            chosen.append(z)
            mates.append(None)
    out = []
    for z, w in zip(chosen, mates):
        if coeffs is not None and w is not None and abs(z - w) < PAIR_TOL:
            z = _polish_double_root(coeffs, 0.5 * (z + w))
        out.append(z)
    return np.array(out, dtype=complex)


def root_music_roots(sub: SubspaceDecomposition, num_sources: int) -> RootSet:
    coeffs = root_music_polynomial(sub)
    roots = polynomial_roots(coeffs)
    return RootSet(roots=roots, selected=select_roots(roots, num_sources, coeffs))


def root_music(sub: SubspaceDecomposition, geometry: UlaGeometry, num_sources: int) -> DoaEstimate:
    """Root-MUSIC: DoAs from the noise-projector polynomial roots."""
    if not 1 <= num_sources < geometry.num_elements:
        raise ValueError("Root-MUSIC needs 1 <= num_sources < M")
    rs = root_music_roots(sub, num_sources)
    return _phase_to_angles("rmusic", np.angle(rs.selected), geometry.spacing, num_sources, [])


def root_music_from_covariance(R, geometry: UlaGeometry, num_sources: int) -> DoaEstimate:
    return root_music(subspaces(R, num_sources), geometry, num_sources)


def esprit_from_snapshots(X, geometry: UlaGeometry, num_sources: int) -> DoaEstimate:
    return esprit(sample_covariance(X), geometry, num_sources)
