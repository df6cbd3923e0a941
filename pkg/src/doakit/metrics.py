"""Figures of merit: MSE, DoA discrimination, flop counts and parallel speedup."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import canonical_method
from .spectral import AngularSpectrum, DoaEstimate


class LobeTooWideError(ValueError):
    """The half-power crossing of the main lobe lies outside the scan range."""


@dataclass
class TrialEnsemble:
    """Per-trial estimates of one method for one scenario.

    ``estimates[i]`` is ``None`` when trial ``i`` raised; the message is kept
    in ``errors[i]``.
    """

    method: str
    true_angles: np.ndarray
    estimates: list[DoaEstimate | None]
    errors: list[str | None] = field(default_factory=list)

    def __post_init__(self):
        self.true_angles = np.sort(np.atleast_1d(np.asarray(self.true_angles, dtype=float)))
        if not self.errors:
            self.errors = [None] * len(self.estimates)

    @property
    def num_trials(self) -> int:
        return len(self.estimates)

    def complete(self) -> list[DoaEstimate]:
        """Estimates that returned every source."""
        L = self.true_angles.size
        return [e for e in self.estimates if e is not None and e.angles_deg.size == L]

    @property
    def num_failed(self) -> int:
        """Trials that raised or found fewer sources than requested."""
        return self.num_trials - len(self.complete())

    @property
    def num_errors(self) -> int:
        return sum(e is not None for e in self.errors)

    @property
    def underdetected_rate(self) -> float:
        return self.num_failed / self.num_trials if self.num_trials else 0.0

    def angle_matrix(self) -> np.ndarray:
        """``I_valid x L`` array of sorted estimates."""
        done = self.complete()
        if not done:
            return np.empty((0, self.true_angles.size))
        return np.vstack([np.sort(e.angles_deg) for e in done])


def mse(ensemble: TrialEnsemble) -> float:
    """Mean squared DoA error with the ``I - 1`` divisor.

    Estimates and truths are paired after sorting both ascending; squared
    errors are summed over sources within a trial. Trials that failed or
    were underdetected are excluded (see ``TrialEnsemble.num_failed``).
    """
    A = ensemble.angle_matrix()
    I = A.shape[0]
    if I < 2:
        raise ValueError(f"need at least two complete trials, got {I}")
    err = np.sum((A - ensemble.true_angles[None, :]) ** 2, axis=1)
    return float(err.sum() / (I - 1))


@dataclass(frozen=True)
class SpreadStats:
    sigma: float
    mu: float
    ci95: tuple[float, float]


def discrimination_std(ensemble: TrialEnsemble) -> SpreadStats:
    """Sample standard deviation, mean and 95% normal CI of single-source estimates."""
    if ensemble.true_angles.size != 1:
        raise ValueError("discrimination_std needs a single-source ensemble")
    x = ensemble.angle_matrix()[:, 0]
    I = x.size
    if I < 2:
        raise ValueError(f"need at least two complete trials, got {I}")
    mu = float(x.mean())
    sigma = float(x.std(ddof=1))
    half = 1.96 * sigma / math.sqrt(I)
    return SpreadStats(sigma=sigma, mu=mu, ci95=(mu - half, mu + half))


def spread_histogram(ensemble: TrialEnsemble, bin_width_sigma: float = 0.25,
                     span_sigma: float = 5.0) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of single-source estimates on bins of ``0.25 sigma`` over ``mu +- 5 sigma``.

    Returns:
        ``(edges, counts)``; estimates outside the span are not counted.
    """
    s = discrimination_std(ensemble)
    if s.sigma == 0:
        raise ValueError("estimates have zero spread")
    n = int(round(2 * span_sigma / bin_width_sigma))
    edges = s.mu + s.sigma * (np.arange(n + 1) * bin_width_sigma - span_sigma)
    counts, _ = np.histogram(ensemble.angle_matrix()[:, 0], bins=edges)
    return edges, counts


def discrimination_3db(spectrum: AngularSpectrum) -> float:
    """Half-power width of the main lobe, in degrees.

    Walks out from the global maximum to the first samples at or below half
    the peak power and interpolates each crossing linearly.

    Raises:
        LobeTooWideError: a crossing is not reached inside the scan range.
    """
    p = np.asarray(spectrum.power, dtype=float)
    a = np.asarray(spectrum.angles_deg, dtype=float)
    if p.size < 3:
        raise ValueError("spectrum needs at least three points")
    k = int(np.argmax(p))
    half = 0.5 * p[k]
    below = np.flatnonzero(p[k::-1] <= half)
    above = np.flatnonzero(p[k:] <= half)
    if below.size == 0 or above.size == 0:
        raise LobeTooWideError("lobe wider than scan range")
    i = k - below[0]   # p[i] <= half < p[i+1]
    j = k + above[0]   # p[j-1] > half >= p[j]
    left = a[i] + (half - p[i]) * (a[i + 1] - a[i]) / (p[i + 1] - p[i])
    right = a[j - 1] + (half - p[j - 1]) * (a[j] - a[j - 1]) / (p[j] - p[j - 1])
    return float(right - left)


# -- complexity model ---------------------------------------------------------

@dataclass(frozen=True)
class ComplexityParams:
    M: int = 256
    S: int = 1000
    L: int = 1
    P: int = 180001
    n_fft: int = 1024

    def __post_init__(self):
        for name in ("M", "S", "L", "P", "n_fft"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def flops(method: str, params: ComplexityParams | None = None) -> float:
    """Closed-form operation count of one estimator run.

    Raises:
        ValueError: unknown method tag.
    """
    q = params or ComplexityParams()
    M, S, L, P, N = q.M, q.S, q.L, q.P, q.n_fft
    method = canonical_method(method)
    if method == "ds":
        return M**2 * (S + 2) + M + 4 * L * P
    if method == "mvdr":
        return M**2 * (S + 6) + M + 4 * L * P
    if method == "music":
        return 5 / 3 * M**3 + M**2 * (S + L + 1) + 4 * L * P
    if method == "esprit":
        return 2 * M**3 + M**2 * (S + 1) + L * (L + 1)
    if method == "uesprit":
        return 13 / 3 * M**3 + 11 * M**2 + M * (S**2 + S + M + 1) + L**2 / 2 + L / 2
    if method == "rmusic":
        return 11 / 3 * M**3 + M**2 * (S - 1 + L) + 2 * (M - 1)
    return (N * math.log2(N) + 4 * L * N) * S


def flops_alternative(method: str, params: ComplexityParams | None = None) -> float | None:
    """Per-step cost sums that disagree with :func:`flops`, where they exist.

    MUSIC: adds an ``M^3`` term for the scan. ESPRIT: uses a ``(4/3) M^3``
    leading term for the eigendecomposition. Other methods return ``None``.
    """
    q = params or ComplexityParams()
    M, S, L, P = q.M, q.S, q.L, q.P
    method = canonical_method(method)
    if method == "music":
        return 5 / 3 * M**3 + M**2 * (S + 1 + L + M) + 4 * L * P
    if method == "esprit":
        return 4 / 3 * M**3 + M**2 * (S + 1) + L * (L + 1)
    return None


# -- speedup model ------------------------------------------------------------

@dataclass(frozen=True)
class SpeedupModel:
    """Amdahl speedup with an optional overhead linear in ``N``.

    ``serial_fraction`` is ``tau_s / tau_1``; the overhead is
    ``overhead * N`` in units of the single-processor time.
    """

    serial_fraction: float
    overhead: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.serial_fraction <= 1.0:
            raise ValueError("serial_fraction must lie in [0, 1]")
        if self.overhead < 0:
            raise ValueError("overhead must be non-negative")


def speedup(model: SpeedupModel, N) -> float | np.ndarray:
    """``S_N = 1 / (f + (1 - f)/N + c N)``."""
    N_arr = np.asarray(N, dtype=float)
    if np.any(N_arr < 1):
        raise ValueError("N must be >= 1")
    f, c = model.serial_fraction, model.overhead
    s = 1.0 / (f + (1.0 - f) / N_arr + c * N_arr)
    return float(s) if s.ndim == 0 else s


def fit_serial_fraction(target_speedup: float, N: int) -> float:
    """Serial fraction that gives ``target_speedup`` on ``N`` processors (no overhead)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 1.0 <= target_speedup <= N:
        raise ValueError(f"target speedup must lie in [1, {N}], got {target_speedup}")
    if N == 1:
        return 1.0
    return (1.0 / target_speedup - 1.0 / N) / (1.0 - 1.0 / N)


# speedups on 24 processors used to calibrate per-method serial fractions
REFERENCE_SPEEDUP_N24 = {
    "ds": 1.50,
    "mvdr": 1.62,
    "music": 1.57,
    "esprit": 1.23,
    "uesprit": 1.16,
    "rmusic": 1.75,
    "ftdoa": 4.32,
}


def calibrated_model(method: str, N_ref: int = 24) -> SpeedupModel:
    """Speedup model whose serial fraction reproduces the reference speedup at ``N_ref``."""
    target = REFERENCE_SPEEDUP_N24[canonical_method(method)]
    return SpeedupModel(fit_serial_fraction(target, N_ref))
