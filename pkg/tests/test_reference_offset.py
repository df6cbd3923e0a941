"""Reference spread values reproduce at a 6 dB higher SNR.

Under ``noise_power = ps * 10**(-snr/10)`` the reference single-source spreads
quoted for M = 64 at -20 dB are reached at about -14 dB. This pins that offset so a
change in the noise model shows up here rather than only in the acceptance run.
"""

import numpy as np
import pytest

from doakit.array_model import Scenario, SourceSet, UlaGeometry
from doakit.harness import run_trials_multi
from doakit.metrics import discrimination_std

REF_64 = {"esprit": (9.9940, 0.0805), "uesprit": (9.9104, 0.0705), "rmusic": (9.9998, 0.0165)}
OFFSET_DB = 20 * np.log10(2)  # noise amplitude halved


def test_reference_spreads_at_offset_snr():
    sc = Scenario(UlaGeometry(64), SourceSet((10.0,)), -20.0 + OFFSET_DB, 1000, seed=21)
    run = run_trials_multi(sc, list(REF_64), 400)
    for m, (mu, sigma) in REF_64.items():
        s = discrimination_std(run.ensembles[m])
        assert s.sigma == pytest.approx(sigma, rel=0.20), m
        # 0.02 deg absorbs the sampling error of a 400-trial mean
        assert s.mu == pytest.approx(mu, abs=0.02), m
