"""Direction-of-arrival estimation on uniform linear arrays.

Seven estimators (delay-and-sum, MVDR, MUSIC, ESPRIT, Unitary-ESPRIT,
Root-MUSIC and the spatial FFT) share one snapshot model and one output
type, together with accuracy metrics, an operation-count model, an Amdahl
speedup model and a seeded Monte-Carlo harness.
"""

__version__ = "0.1.0"

from .array_model import (  # noqa: E402
    Scenario,
    SourceSet,
    UlaGeometry,
    exact_covariance,
    sample_covariance,
    steering_matrix,
    steering_vector,
    synthesize_snapshots,
)
from .estimators import METHODS, EstimatorOptions, estimate  # noqa: E402
from .spectral import AngularSpectrum, DoaEstimate, ScanGrid  # noqa: E402

__all__ = [
    "__version__",
    "UlaGeometry",
    "SourceSet",
    "Scenario",
    "steering_vector",
    "steering_matrix",
    "synthesize_snapshots",
    "sample_covariance",
    "exact_covariance",
    "METHODS",
    "EstimatorOptions",
    "estimate",
    "ScanGrid",
    "AngularSpectrum",
    "DoaEstimate",
]
