"""Uniform entry point for the seven estimators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import UlaGeometry, sample_covariance
from .linalg import subspaces
from .parametric import esprit, root_music, unitary_esprit, unitary_esprit_covariance
from .spectral import (
    AngularSpectrum,
    DoaEstimate,
    ScanGrid,
    ds_spectrum,
    find_peaks,
    ft_spectrum,
    ft_spectrum_from_covariance,
    music_spectrum,
    mvdr_spectrum,
)

METHODS = ("ds", "mvdr", "music", "esprit", "uesprit", "rmusic", "ftdoa")
SCAN_METHODS = ("ds", "mvdr", "music", "ftdoa")

DISPLAY_NAMES = {
    "ds": "DS",
    "mvdr": "MVDR",
    "music": "MUSIC",
    "esprit": "ESPRIT",
    "uesprit": "U-ESPRIT",
    "rmusic": "R-MUSIC",
    "ftdoa": "FT-DoA",
}

_ALIASES = {
    "bartlett": "ds",
    "delay-and-sum": "ds",
    "capon": "mvdr",
    "u-esprit": "uesprit",
    "unitary-esprit": "uesprit",
    "unitary_esprit": "uesprit",
    "root-music": "rmusic",
    "r-music": "rmusic",
    "root_music": "rmusic",
    "ft": "ftdoa",
    "ft-doa": "ftdoa",
    "fft": "ftdoa",
}


def canonical_method(tag: str) -> str:
    key = tag.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in METHODS:
        raise ValueError(f"unknown method {tag!r}; choose from {', '.join(METHODS)}")
    return key


def resolve_methods(spec) -> list[str]:
    """Expand ``"all"``, a comma list or a sequence of tags."""
    if isinstance(spec, str):
        if spec.strip().lower() == "all":
            return list(METHODS)
        spec = [s for s in spec.split(",") if s.strip()]
    out = []
    for tag in spec:
        key = canonical_method(tag)
        if key not in out:
            out.append(key)
    if not out:
        raise ValueError("no methods selected")
    return out


@dataclass(frozen=True)
class EstimatorOptions:
    grid: ScanGrid = field(default_factory=ScanGrid)
    n_fft: int = 1024
    loading: float = 0.0


def spectrum(method: str, geometry: UlaGeometry, num_sources: int, *, X=None, R=None,
             options: EstimatorOptions | None = None) -> AngularSpectrum:
    """Angular spectrum of a scan method from snapshots ``X`` or a covariance ``R``."""
    method = canonical_method(method)
    if method not in SCAN_METHODS:
        raise ValueError(f"{method} does not produce an angular spectrum")
    opts = options or EstimatorOptions()
    if X is None and R is None:
        raise ValueError("provide snapshots X or a covariance R")
    if method == "ftdoa":
        if X is not None:
            return ft_spectrum(X, geometry, opts.n_fft)
        return ft_spectrum_from_covariance(R, geometry, opts.n_fft)
    if R is None:
        R = sample_covariance(X)
    if method == "ds":
        return ds_spectrum(R, geometry, opts.grid)
    if method == "mvdr":
        return mvdr_spectrum(R, geometry, opts.grid, opts.loading)
    return music_spectrum(subspaces(R, num_sources), geometry, opts.grid)


def estimate(method: str, geometry: UlaGeometry, num_sources: int, *, X=None, R=None,
             options: EstimatorOptions | None = None,
             return_spectrum: bool = False):
    """Run one estimator.

    Args:
        method: method tag or alias.
        geometry: array geometry.
        num_sources: number of sources to report.
        X: ``M x S`` snapshots. Used directly by U-ESPRIT and FT-DoA.
        R: covariance, used instead of ``X`` in exact-covariance mode.
        options: grid, FFT length and MVDR loading.
        return_spectrum: also return the scan spectrum (``None`` for
            search-free methods).

    Returns:
        A :class:`DoaEstimate`, or ``(estimate, spectrum)``.
    """
    method = canonical_method(method)
    if X is None and R is None:
        raise ValueError("provide snapshots X or a covariance R")
    spec = None
    if method in SCAN_METHODS:
        spec = spectrum(method, geometry, num_sources, X=X, R=R, options=options)
        est = find_peaks(spec, num_sources)
    elif method == "uesprit":
        if X is not None:
            est = unitary_esprit(X, geometry, num_sources)
        else:
            est = unitary_esprit_covariance(R, geometry, num_sources)
    else:
        if R is None:
            R = sample_covariance(X)
        if method == "esprit":
            est = esprit(R, geometry, num_sources)
        else:
            est = root_music(subspaces(R, num_sources), geometry, num_sources)
    return (est, spec) if return_spectrum else est


def estimate_all(geometry: UlaGeometry, num_sources: int, X, methods=METHODS,
                 options: EstimatorOptions | None = None) -> dict[str, DoaEstimate]:
    """Run several methods on one snapshot block, sharing the covariance."""
    R = sample_covariance(X)
    return {m: estimate(m, geometry, num_sources, X=X, R=None if m in ("ftdoa", "uesprit") else R,
                        options=options) for m in resolve_methods(list(methods))}


def angles_array(est: DoaEstimate) -> np.ndarray:
    return np.asarray(est.angles_deg, dtype=float)
