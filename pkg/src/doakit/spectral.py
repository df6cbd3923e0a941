"""Grid-search estimators (DS, MVDR, MUSIC) and the FFT spatial spectrum.

All quadratic-form spectra ``a(theta)^H B a(theta)`` are evaluated from the
diagonal sums of ``B``, which turns an ``O(M^2 P)`` scan into ``O(M P)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .array_model import UlaGeometry
from .linalg import SubspaceDecomposition, dft, invert_hermitian

# keep the endpoints of a full-range grid strictly inside (-90, 90)
_ENDFIRE_MARGIN = 1e-9


@dataclass(frozen=True)
class ScanGrid:
    start_deg: float = -90.0
    stop_deg: float = 90.0
    step_deg: float = 0.001

    def __post_init__(self):
        if not self.step_deg > 0:
            raise ValueError("step_deg must be positive")
        if not self.start_deg < self.stop_deg:
            raise ValueError("start_deg must be smaller than stop_deg")
        if self.start_deg < -90 or self.stop_deg > 90:
            raise ValueError("grid must lie within [-90, 90]")

    @property
    def num_points(self) -> int:
        return int(np.floor((self.stop_deg - self.start_deg) / self.step_deg + 1e-9)) + 1

    def angles(self) -> np.ndarray:
        theta = self.start_deg + self.step_deg * np.arange(self.num_points)
        lim = 90.0 - _ENDFIRE_MARGIN
        return np.clip(theta, -lim, lim)


@dataclass(frozen=True)
class AngularSpectrum:
    """Power (linear scale) against scan angle."""

    angles_deg: np.ndarray
    power: np.ndarray
    method: str = ""

    def __post_init__(self):
        if self.angles_deg.shape != self.power.shape:
            raise ValueError("angles and power must have the same length")

    def power_db(self) -> np.ndarray:
        """Power in dB relative to the spectrum maximum."""
        peak = self.power.max(initial=0.0)
        floor = np.finfo(float).tiny
        return 10.0 * np.log10(np.maximum(self.power, floor) / max(peak, floor))


@dataclass(frozen=True)
class DoaEstimate:
    """Estimated directions, sorted ascending.

    ``underdetected`` counts sources the estimator failed to produce;
    ``warnings`` holds per-source diagnostics such as out-of-visible-region
    phases.
    """

    method: str
    angles_deg: np.ndarray
    peak_powers: np.ndarray | None = None
    underdetected: int = 0
    warnings: tuple[str, ...] = field(default=())

    @property
    def num_found(self) -> int:
        return int(self.angles_deg.size)


def _quadratic_scan(B, geometry: UlaGeometry, grid: ScanGrid) -> tuple[np.ndarray, np.ndarray]:
    theta = grid.angles()
    psi = geometry.phase(theta)
    sums = kernels.diagonal_sums(B)
    return theta, kernels.scan_quadratic(sums, psi)


def ds_spectrum(R, geometry: UlaGeometry, grid: ScanGrid | None = None) -> AngularSpectrum:
    """Delay-and-sum (Bartlett) output power ``a^H R a``."""
    theta, q = _quadratic_scan(R, geometry, grid or ScanGrid())
    return AngularSpectrum(theta, np.maximum(q, 0.0), "ds")


def mvdr_spectrum(R, geometry: UlaGeometry, grid: ScanGrid | None = None,
                  loading: float = 0.0) -> AngularSpectrum:
    """Capon output power ``1 / (a^H R^-1 a)``."""
    Rinv = invert_hermitian(R, loading)
    theta, q = _quadratic_scan(Rinv, geometry, grid or ScanGrid())
    eps = 1e-12 * geometry.num_elements
    return AngularSpectrum(theta, 1.0 / np.maximum(q, eps), "mvdr")


def music_spectrum(sub: SubspaceDecomposition, geometry: UlaGeometry,
                   grid: ScanGrid | None = None) -> AngularSpectrum:
    """MUSIC pseudo-spectrum ``1 / (a^H Qn Qn^H a)``."""
    theta, q = _quadratic_scan(sub.noise_projector(), geometry, grid or ScanGrid())
    eps = 1e-12 * geometry.num_elements
    return AngularSpectrum(theta, 1.0 / np.maximum(q, eps), "music")


def _fft_bins(geometry: UlaGeometry, n_fft: int):
    # bin l of exp(-j 2 pi m l / n) sits at spatial frequency u = -f_l
    u = -np.fft.fftfreq(n_fft)
    keep = np.flatnonzero(np.abs(u) < geometry.spacing)
    order = keep[np.argsort(u[keep], kind="stable")]
    theta = np.rad2deg(np.arcsin(u[order] / geometry.spacing))
    return order, u[order], theta


def ft_spectrum(X, geometry: UlaGeometry, n_fft: int = 1024) -> AngularSpectrum:
    """Spatial FFT spectrum averaged over snapshots.

    Each snapshot is zero-padded to ``n_fft`` and transformed across the
    element axis; squared magnitudes are averaged over snapshots. Bins outside
    the visible region are discarded and the rest mapped to angle.
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if X.shape[0] != geometry.num_elements:
        raise ValueError("snapshot rows do not match the array size")
    F = dft(X, n_fft)
    power = np.mean(np.abs(F) ** 2, axis=1)
    order, _, theta = _fft_bins(geometry, n_fft)
    return AngularSpectrum(theta, power[order], "ftdoa")


def ft_spectrum_from_covariance(R, geometry: UlaGeometry, n_fft: int = 1024) -> AngularSpectrum:
    """Expected FFT spectrum for covariance ``R`` (exact-covariance mode)."""
    M = geometry.num_elements
    if n_fft < M:
        raise ValueError(f"n_fft={n_fft} is smaller than the array size {M}")
    _, u, theta = _fft_bins(geometry, n_fft)
    q = kernels.scan_quadratic(kernels.diagonal_sums(R), 2.0 * np.pi * u)
    return AngularSpectrum(theta, np.maximum(q, 0.0), "ftdoa")


def find_peaks(spectrum: AngularSpectrum, num_sources: int) -> DoaEstimate:
    """Pick the ``num_sources`` strongest local maxima.

    A peak is an index with ``p[i] > p[i-1]`` and ``p[i] >= p[i+1]``. Equal
    powers are resolved toward the smaller angle.
    """
    if spectrum.power.size < 3:
        raise ValueError("spectrum needs at least three points")
    idx = kernels.local_maxima(spectrum.power)
    # lexsort: last key is primary -> descending power, then ascending angle
    ranked = idx[np.lexsort((spectrum.angles_deg[idx], -spectrum.power[idx]))]
    chosen = ranked[:num_sources]
    chosen = chosen[np.argsort(spectrum.angles_deg[chosen], kind="stable")]
    return DoaEstimate(
        method=spectrum.method,
        angles_deg=spectrum.angles_deg[chosen].copy(),
        peak_powers=spectrum.power[chosen].copy(),
        underdetected=num_sources - chosen.size,
    )


def write_spectrum_csv(spectrum: AngularSpectrum, path) -> None:
    """Write ``angle_deg,power_linear,power_db`` rows."""
    db = spectrum.power_db()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle_deg", "power_linear", "power_db"])
        for a, p, d in zip(spectrum.angles_deg, spectrum.power, db):
            writer.writerow([f"{a:.6f}", repr(float(p)), f"{d:.6f}"])


def read_spectrum_csv(path, method: str = "") -> AngularSpectrum:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return AngularSpectrum(data[:, 0], data[:, 1], method)
