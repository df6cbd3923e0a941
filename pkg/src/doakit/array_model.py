"""Uniform linear array geometry, snapshot synthesis and covariance estimates.

Conventions used throughout the package:

* element ``k`` of the steering vector is ``exp(-j 2 pi (d/lambda) k sin(theta))``;
* the SNR is the per-element ratio ``source_power / noise_power`` in dB;
* snapshot matrices are ``M x S`` complex arrays (row = element).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml


@dataclass(frozen=True)
class UlaGeometry:
    """Uniform linear array.

    Attributes:
        num_elements: number of sensors ``M`` (>= 2).
        spacing: inter-element spacing in wavelengths, ``d / lambda``.
        subarray_displacement: shift between the two rotational-invariance
            subarrays in wavelengths, ``Delta / lambda``. Defaults to
            ``spacing``; must be a whole number of element spacings.
    """

    num_elements: int
    spacing: float = 0.5
    subarray_displacement: float | None = None

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise ValueError(f"num_elements must be an integer >= 2, got {self.num_elements}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.subarray_displacement is None:
            object.__setattr__(self, "subarray_displacement", float(self.spacing))
        if not self.subarray_displacement > 0:
            raise ValueError("subarray_displacement must be positive")
        ratio = self.subarray_displacement / self.spacing
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) >= self.num_elements:
            raise ValueError(
                "subarray_displacement must be a whole multiple of spacing "
                "smaller than the aperture"
            )

    @property
    def subarray_shift(self) -> int:
        """Subarray displacement in elements."""
        return int(round(self.subarray_displacement / self.spacing))

    def phase(self, theta_deg):
        """Per-element phase increment ``2 pi (d/lambda) sin(theta)``."""
        return 2.0 * np.pi * self.spacing * np.sin(np.deg2rad(theta_deg))


@dataclass(frozen=True)
class SourceSet:
    """Far-field narrowband sources with a shared power."""

    angles_deg: tuple[float, ...]
    source_power: float = 1.0

    def __post_init__(self):
        angles = tuple(float(a) for a in np.atleast_1d(self.angles_deg))
        object.__setattr__(self, "angles_deg", angles)
        if len(angles) < 1:
            raise ValueError("at least one source is required")
        if any(not -90.0 < a < 90.0 for a in angles):
            raise ValueError(f"source angles must lie in (-90, 90), got {angles}")
        if len(set(angles)) != len(angles):
            raise ValueError("source angles must be distinct")
        if not self.source_power > 0:
            raise ValueError("source_power must be positive")

    @property
    def num_sources(self) -> int:
        return len(self.angles_deg)


@dataclass(frozen=True)
class Scenario:
    geometry: UlaGeometry
    sources: SourceSet
    snr_db: float = 0.0
    num_snapshots: int = 1000
    seed: int = 0

    def __post_init__(self):
        if int(self.num_snapshots) != self.num_snapshots or self.num_snapshots < 1:
            raise ValueError("num_snapshots must be a positive integer")

    @property
    def noise_power(self) -> float:
        return noise_power(self.sources.source_power, self.snr_db)

    def with_(self, **changes) -> "Scenario":
        """Copy with some fields replaced; ``m``/``angles_deg`` are accepted as shortcuts."""
        if "m" in changes:
            changes["geometry"] = replace(self.geometry, num_elements=int(changes.pop("m")))
        if "angles_deg" in changes:
            changes["sources"] = replace(self.sources, angles_deg=tuple(changes.pop("angles_deg")))
        return replace(self, **changes)


def noise_power(source_power: float, snr_db: float) -> float:
    """Noise variance per element for a per-element SNR in dB (``inf`` -> 0)."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return source_power / 10.0 ** (snr_db / 10.0)


def _check_angle(theta_deg):
    theta = np.asarray(theta_deg, dtype=float)
    if np.any(np.abs(theta) >= 90.0) or not np.all(np.isfinite(theta)):
        raise ValueError("steering angles must satisfy |theta| < 90 degrees")
    return theta


def steering_vector(geometry: UlaGeometry, theta_deg: float) -> np.ndarray:
    """Array response to a plane wave from ``theta_deg``; element 0 is 1."""
    theta = _check_angle(theta_deg)
    k = np.arange(geometry.num_elements)
    return np.exp(-1j * k * geometry.phase(theta))


def steering_matrix(geometry: UlaGeometry, angles_deg) -> np.ndarray:
    """``M x L`` matrix whose columns are steering vectors.

    ``angles_deg`` may be a :class:`SourceSet` or a sequence of angles.
    """
    if isinstance(angles_deg, SourceSet):
        angles_deg = angles_deg.angles_deg
    theta = _check_angle(np.atleast_1d(angles_deg))
    k = np.arange(geometry.num_elements)[:, None]
    return np.exp(-1j * k * geometry.phase(theta)[None, :])


def _complex_normal(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_snapshots(scenario: Scenario, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw ``X = A S + N`` with circular complex Gaussian sources and noise.

    Args:
        scenario: array, sources, SNR and snapshot count.
        rng: generator to draw from. Defaults to one seeded with
            ``scenario.seed`` so the output is a pure function of the scenario.

    Returns:
        ``M x S`` complex snapshot matrix.
    """
    if rng is None:
        rng = np.random.default_rng(scenario.seed)
    A = steering_matrix(scenario.geometry, scenario.sources)
    L, S = A.shape[1], scenario.num_snapshots
    s = _complex_normal(rng, (L, S), scenario.sources.source_power)
    X = A @ s
    sigma2 = scenario.noise_power
    # draw noise even when disabled so the stream layout does not depend on SNR
    n = _complex_normal(rng, X.shape, 1.0)
    if sigma2 > 0:
        X = X + math.sqrt(sigma2) * n
    return X


def sample_covariance(X) -> np.ndarray:
    """``X X^H / S``, symmetrised so the result is exactly Hermitian."""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("snapshot matrix must be 2-D with at least one column")
    R = X @ X.conj().T / X.shape[1]
    return 0.5 * (R + R.conj().T)


def covariance_model(A, source_power: float, noise_power_: float) -> np.ndarray:
    """``source_power * A A^H + noise_power * I``."""
    A = np.asarray(A, dtype=complex)
    R = source_power * (A @ A.conj().T) + noise_power_ * np.eye(A.shape[0])
    return 0.5 * (R + R.conj().T)


def exact_covariance(geometry: UlaGeometry, sources: SourceSet, snr_db: float) -> np.ndarray:
    """Asymptotic covariance for uncorrelated equal-power sources."""
    A = steering_matrix(geometry, sources)
    return covariance_model(A, sources.source_power, noise_power(sources.source_power, snr_db))


# -- configuration and CSV I/O ------------------------------------------------

_SCENARIO_KEYS = {"m", "d_over_lambda", "delta_over_lambda", "angles_deg", "snr_db", "snapshots", "seed"}


@dataclass
class Config:
    """Parsed configuration file: the scenario plus any extra sections."""

    scenario: Scenario
    extra: dict = field(default_factory=dict)


def scenario_from_mapping(data: dict) -> Scenario:
    missing = {"m", "angles_deg"} - data.keys()
    if missing:
        raise ValueError(f"config is missing required keys: {sorted(missing)}")
    geometry = UlaGeometry(
        num_elements=int(data["m"]),
        spacing=float(data.get("d_over_lambda", 0.5)),
        subarray_displacement=(
            float(data["delta_over_lambda"]) if data.get("delta_over_lambda") is not None else None
        ),
    )
    sources = SourceSet(
        angles_deg=tuple(np.atleast_1d(data["angles_deg"]).tolist()),
        source_power=float(data.get("source_power", 1.0)),
    )
    return Scenario(
        geometry=geometry,
        sources=sources,
        snr_db=float(data.get("snr_db", 0.0)),
        num_snapshots=int(data.get("snapshots", 1000)),
        seed=int(data.get("seed", 0)),
    )


def scenario_to_mapping(scenario: Scenario) -> dict:
    g = scenario.geometry
    return {
        "m": g.num_elements,
        "d_over_lambda": g.spacing,
        "delta_over_lambda": g.subarray_displacement,
        "angles_deg": list(scenario.sources.angles_deg),
        "source_power": scenario.sources.source_power,
        "snr_db": scenario.snr_db,
        "snapshots": scenario.num_snapshots,
        "seed": scenario.seed,
    }


def load_config(path) -> Config:
    """Read a YAML (or JSON) scenario file.

    Scenario keys sit at the top level; anything else (``plan``, ``grid_step``,
    ``n_fft``, ...) is returned untouched in ``Config.extra``.
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    scenario = scenario_from_mapping(data)
    extra = {k: v for k, v in data.items() if k not in _SCENARIO_KEYS | {"source_power"}}
    return Config(scenario=scenario, extra=extra)


def write_snapshots_csv(X, path) -> None:
    """One row per element, columns ``re_0, im_0, re_1, im_1, ...``."""
    X = np.asarray(X, dtype=complex)
    header = [f"{part}_{n}" for n in range(X.shape[1]) for part in ("re", "im")]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in X:
            inter = np.empty(2 * row.size)
            inter[0::2] = row.real
            inter[1::2] = row.imag
            writer.writerow([repr(float(v)) for v in inter])


def read_snapshots_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0::2] + 1j * data[:, 1::2]
