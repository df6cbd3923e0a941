import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doakit.array_model import SourceSet, UlaGeometry, exact_covariance
from doakit.metrics import (
    REFERENCE_SPEEDUP_N24,
    ComplexityParams,
    LobeTooWideError,
    SpeedupModel,
    TrialEnsemble,
    calibrated_model,
    discrimination_3db,
    discrimination_std,
    fit_serial_fraction,
    flops,
    flops_alternative,
    mse,
    speedup,
    spread_histogram,
)
from doakit.spectral import AngularSpectrum, DoaEstimate, ScanGrid, ds_spectrum


def ensemble(values, truth=10.0, method="esprit"):
    rows = [np.atleast_1d(np.asarray(v, dtype=float)) for v in values]
    return TrialEnsemble(method, truth, [DoaEstimate(method, r) for r in rows])


# -- MSE and spread ------------------------------------------------------------------

def test_mse_examples():
    assert mse(ensemble([10.0, 10.0, 10.0])) == 0.0
    assert mse(ensemble([9.0, 11.0])) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        mse(ensemble([9.0]))


def test_mse_sorted_pairing_and_source_sum():
    e = TrialEnsemble("x", [20.0, -5.0], [DoaEstimate("x", np.array([21.0, -5.0])),
                                          DoaEstimate("x", np.array([-7.0, 20.0]))])
    # per-trial sums 1 and 4; divisor I - 1 = 1
    assert mse(e) == pytest.approx(5.0)


def test_mse_excludes_failures_and_counts_them():
    est = [DoaEstimate("x", np.array([9.0])), None, DoaEstimate("x", np.array([11.0])),
           DoaEstimate("x", np.empty(0), underdetected=1)]
    e = TrialEnsemble("x", 10.0, est, [None, "boom", None, None])
    assert mse(e) == pytest.approx(2.0)
    assert e.num_failed == 2 and e.num_errors == 1
    assert e.underdetected_rate == pytest.approx(0.5)


def test_discrimination_std_examples():
    s = discrimination_std(ensemble([9.0, 11.0]))
    assert s.sigma == pytest.approx(math.sqrt(2))
    assert s.mu == pytest.approx(10.0)
    half = 1.96 * math.sqrt(2) / math.sqrt(2)
    assert s.ci95 == pytest.approx((10 - half, 10 + half))
    assert discrimination_std(ensemble([3.0] * 5)).sigma == 0.0
    with pytest.raises(ValueError):
        discrimination_std(TrialEnsemble("x", [1.0, 2.0], []))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-30, 30), min_size=2, max_size=20), st.floats(-40, 40))
def test_translation_invariance(values, shift):
    a = ensemble(values, truth=1.0)
    b = ensemble([v + shift for v in values], truth=1.0 + shift)
    assert mse(b) == pytest.approx(mse(a), rel=1e-9, abs=1e-9)
    assert discrimination_std(b).sigma == pytest.approx(discrimination_std(a).sigma,
                                                        rel=1e-9, abs=1e-9)


# -- 3 dB width ----------------------------------------------------------------------

@pytest.mark.parametrize("w", [0.5, 1.3, 4.0])
def test_triangle_half_power_width(w):
    step = 0.01
    a = np.arange(-20, 20 + step / 2, step)
    p = np.clip(1 - np.abs(a - 2.0) / (2 * w), 0, None)
    width = discrimination_3db(AngularSpectrum(a, p))
    assert abs(width - 2 * w) <= step


def test_lobe_too_wide():
    a = np.linspace(-10, 10, 41)
    with pytest.raises(LobeTooWideError, match="lobe wider than scan range"):
        discrimination_3db(AngularSpectrum(a, 2 + np.cos(np.deg2rad(a))))


def test_ds_width_shrinks_with_aperture():
    grid = ScanGrid(-30, 50, 0.001)
    widths = []
    for M in (64, 128):
        g = UlaGeometry(M)
        widths.append(discrimination_3db(ds_spectrum(exact_covariance(g, SourceSet((10.0,)), 20.0), g, grid)))
    assert widths[1] < widths[0]
    # half-power beamwidth of a uniform aperture is about 0.886 / (M d cos theta) rad
    ratio = widths[0] / widths[1]
    assert ratio == pytest.approx(2.0, rel=0.02)


# -- complexity model ----------------------------------------------------------------

HAND = {
    # evaluated by hand at M=256, S=1000, L=1, P=180001, n_fft=1024
    "ds": 256**2 * 1002 + 256 + 4 * 180001,
    "mvdr": 256**2 * 1006 + 256 + 4 * 180001,
    "music": 5 * 256**3 / 3 + 256**2 * 1002 + 4 * 180001,
    "esprit": 2 * 256**3 + 256**2 * 1001 + 2,
    "uesprit": 13 * 256**3 / 3 + 11 * 256**2 + 256 * (10**6 + 1000 + 257) + 1,
    "rmusic": 11 * 256**3 / 3 + 256**2 * 1000 + 510,
    "ftdoa": (1024 * 10 + 4 * 1024) * 1000,
}


def test_flops_hand_values():
    assert flops("ds") == 66_387_332
    assert flops("mvdr") == 66_649_476
    for m, v in HAND.items():
        assert flops(m) == pytest.approx(v, rel=1e-15)
    with pytest.raises(ValueError):
        flops("capon2")


def test_flops_esprit_source_count_term():
    small = flops("esprit", ComplexityParams(L=1))
    big = flops("esprit", ComplexityParams(L=128))
    assert big - small == 128 * 129 - 2


def test_flops_alternative_readings():
    # (4/3) M^3 leading term lands on the tabulated 87.98E6 for ESPRIT
    assert flops_alternative("esprit") == pytest.approx(87.98e6, rel=2e-4)
    assert flops_alternative("music") - flops("music") == 256**3
    assert flops_alternative("ds") is None


def test_flops_ordering_at_defaults():
    f = {m: flops(m) for m in HAND}
    cubic = ("music", "esprit", "uesprit", "rmusic")
    assert f["ftdoa"] < f["ds"] < f["mvdr"] < min(f[m] for m in cubic)
    assert max(f, key=f.get) == "uesprit"


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 512), st.integers(1, 5000), st.integers(1, 64), st.integers(10, 10**6))
def test_flops_monotonicity(M, S, L, P):
    base = ComplexityParams(M=M, S=S, L=L, P=P)

    def with_(**kw):
        return ComplexityParams(**{**base.__dict__, **kw})

    for m in ("ds", "mvdr", "music"):
        f = flops(m, base)
        for k in ("M", "S", "L", "P"):
            assert flops(m, with_(**{k: getattr(base, k) + 1})) > f
    for m in ("esprit", "uesprit", "rmusic"):
        assert flops(m, with_(P=P + 1000)) == flops(m, base)
    assert flops("ftdoa", with_(M=M + 7)) == flops("ftdoa", base)


def test_complexity_params_validation():
    with pytest.raises(ValueError):
        ComplexityParams(M=0)


# -- speedup -------------------------------------------------------------------------

def test_speedup_examples():
    assert speedup(SpeedupModel(0.0), 17) == pytest.approx(17)
    np.testing.assert_allclose(speedup(SpeedupModel(1.0), [1, 5, 100]), 1.0)
    assert speedup(SpeedupModel(0.19807), 100) == pytest.approx(4.85, abs=0.005)
    with pytest.raises(ValueError):
        speedup(SpeedupModel(0.1), 0)
    with pytest.raises(ValueError):
        SpeedupModel(1.5)


def test_fit_serial_fraction_examples():
    assert fit_serial_fraction(24, 24) == 0.0
    assert fit_serial_fraction(1, 24) == 1.0
    f = fit_serial_fraction(4.32, 24)
    assert f == pytest.approx(0.19807, abs=1e-5)
    assert speedup(SpeedupModel(f), 24) == pytest.approx(4.32, abs=1e-12)
    for bad in (0.5, 30.0):
        with pytest.raises(ValueError):
            fit_serial_fraction(bad, 24)


def test_calibrated_models_reproduce_reference():
    for m, s in REFERENCE_SPEEDUP_N24.items():
        assert speedup(calibrated_model(m), 24) == pytest.approx(s, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 0.01), st.integers(1, 1000))
def test_speedup_bounds(f, c, N):
    s = speedup(SpeedupModel(f, c), N)
    assert s <= N * (1 + 1e-12)
    if c == 0:
        assert s >= 1 - 1e-12
        assert speedup(SpeedupModel(f), N + 1) >= s - 1e-12
        if f > 0:
            assert s <= 1 / f + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 64), st.integers(64, 256))
def test_fit_round_trip(target, N):
    f = fit_serial_fraction(target, N)
    assert speedup(SpeedupModel(f), N) == pytest.approx(target, rel=1e-12)


def test_spread_histogram_bins():
    rng = np.random.default_rng(1)
    e = ensemble(10 + 0.1 * rng.standard_normal(2000))
    edges, counts = spread_histogram(e)
    s = discrimination_std(e)
    assert edges.size == 41 and counts.size == 40
    np.testing.assert_allclose(np.diff(edges), 0.25 * s.sigma)
    assert edges[0] == pytest.approx(s.mu - 5 * s.sigma)
    assert counts.sum() == 2000
    # roughly normal: the two central bins hold about 2 x 9.9% of the mass
    assert 0.15 < counts[19:21].sum() / 2000 < 0.25
    with pytest.raises(ValueError):
        spread_histogram(ensemble([1.0, 1.0]))
