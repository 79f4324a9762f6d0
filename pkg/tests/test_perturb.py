import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scienet import perturb
from scienet.errors import InputDomainError, ParameterError, StructuralError


def _img(seed=0):
    return np.random.default_rng(seed).uniform(0.05, 0.95, size=3072)


def test_clean_sentinel():
    x = _img()
    assert np.array_equal(perturb.add_awgn(x, math.inf, seed=1), x)


def test_zero_image_rejected():
    with pytest.raises(InputDomainError):
        perturb.add_awgn(np.zeros(3072), 20.0)


@given(st.floats(0.0, 60.0), st.integers(0, 10_000))
def test_pre_clip_snr_exact(snr, seed):
    x = _img(seed % 7)
    noisy = perturb.add_awgn(x, snr, seed=seed, clip=False)
    assert abs(perturb.measure_snr(x, noisy) - snr) <= 0.2


def test_clipped_output_valid():
    out = perturb.add_awgn(_img(), 5.0, seed=3)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_seeded():
    a = perturb.add_awgn(_img(), 20.0, seed=(4, 2))
    b = perturb.add_awgn(_img(), 20.0, seed=(4, 2))
    c = perturb.add_awgn(_img(), 20.0, seed=(4, 3))
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_measure_snr_examples():
    clean = np.full(100, 0.5)
    noisy = clean + np.where(np.arange(100) % 2, 0.05, -0.05)
    assert perturb.measure_snr(clean, noisy) == pytest.approx(20.0)
    assert perturb.measure_snr(clean, clean) == math.inf
    with pytest.raises(StructuralError):
        perturb.measure_snr(clean, clean[:5])


def test_noise_is_white():
    n = perturb.awgn_noise(_img(), 10.0, seed=9)
    n = n - n.mean()
    for lag in (1, 2, 32):
        r = np.dot(n[:-lag], n[lag:]) / np.dot(n, n)
        assert abs(r) < 4 / math.sqrt(n.size)


def test_distortion_grows_as_snr_drops():
    x = _img()
    dist = [np.linalg.norm(perturb.add_awgn(x, s, seed=1, clip=False) - x) for s in (40, 30, 20, 10)]
    assert np.all(np.diff(dist) > 0)


def test_rain_zero_streaks_identity():
    x = _img()
    preset = perturb.rain_preset("light", count=(0, 0))
    assert np.array_equal(perturb.synthesize_rain(x, preset, seed=2), x)


def test_rain_locality_and_range():
    x = _img()
    out = perturb.synthesize_rain(x, "heavy", seed=5)
    layers = perturb.rain_mask(perturb.rain_preset("heavy"), seed=5)
    assert out.min() >= 0 and out.max() <= 1
    covered = sum(cov for cov, _, _ in layers)
    untouched = np.tile(covered.ravel() == 0, 3)
    assert np.array_equal(out[untouched], x[untouched])
    assert not np.array_equal(out, x)


def test_heavy_touches_more_than_light():
    x = _img()
    light = np.mean([np.mean(perturb.synthesize_rain(x, "light", seed=s) != x) for s in range(100)])
    heavy = np.mean([np.mean(perturb.synthesize_rain(x, "heavy", seed=s) != x) for s in range(100)])
    assert heavy > light > 0


def test_preset_validation():
    with pytest.raises(ParameterError):
        perturb.rain_preset("drizzle")
    with pytest.raises(ParameterError):
        perturb.rain_preset("light", alpha=(0.5, 1.5))
    with pytest.raises(ParameterError):
        perturb.rain_preset("light", colour=1)
    with pytest.raises(ParameterError):
        perturb.PerturbationSpec("blur")
    with pytest.raises(ParameterError):
        perturb.PerturbationSpec("awgn", snr_db=float("nan"))


def test_batch_independent_of_grouping():
    xs = np.stack([_img(i) for i in range(4)])
    spec = perturb.PerturbationSpec("awgn", 15.0)
    full = spec.apply_batch(xs, seed=3, ids=np.arange(4))
    part = spec.apply_batch(xs[2:], seed=3, ids=np.arange(2, 4))
    assert np.array_equal(full[2:], part)
    assert spec.label == "awgn_15dB"
    assert perturb.PerturbationSpec("rain", rain="heavy").label == "rain_heavy"
