import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from dispersive_qkd.physics import FiberLink, SourceParams, heralded_width
from dispersive_qkd.security import (
    ClickStats,
    DetectorParams,
    NoSignalError,
    acceptance_probability,
    binary_entropy,
    click_probabilities,
    key_rate,
    qber,
)

SIGMA = 1.5e12


def _entropy_oracle(x):
    return -(x * math.log(x) + (1 - x) * math.log(1 - x)) / math.log(2)


def _window_oracle(xi):
    pdf = lambda y: math.exp(-y * y / 2) / math.sqrt(2 * math.pi)
    return quad(pdf, -xi / 2, xi / 2, epsabs=1e-13, epsrel=1e-13)[0]


def test_binary_entropy_examples():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.11) == pytest.approx(_entropy_oracle(0.11), rel=1e-14)
    assert binary_entropy(0.11) == pytest.approx(0.499916, abs=1e-6)


@pytest.mark.parametrize("x", [-0.01, 1.01, math.nan])
def test_binary_entropy_rejects_out_of_range(x):
    with pytest.raises(ValueError):
        binary_entropy(x)


@given(st.floats(1e-9, 1 - 1e-9))
def test_binary_entropy_range_and_symmetry(x):
    h = binary_entropy(x)
    assert 0.0 <= h <= 1.0
    assert h == pytest.approx(binary_entropy(1 - x), abs=1e-12)


def test_acceptance_probability_examples():
    assert acceptance_probability(0.0) == 0.0
    assert acceptance_probability(50.0) > 1 - 1e-12
    assert acceptance_probability(6.0) == pytest.approx(_window_oracle(6.0), abs=1e-12)
    assert acceptance_probability(6.0) == pytest.approx(0.99730, abs=1e-5)
    for xi in (0.1, 1.0, 3.0, 12.0):
        assert acceptance_probability(xi) == pytest.approx(_window_oracle(xi), abs=1e-12)


def test_acceptance_probability_rejects_negative():
    with pytest.raises(ValueError):
        acceptance_probability(-1.0)


def test_acceptance_probability_strictly_increasing():
    xs = np.linspace(0, 12, 500)
    assert np.all(np.diff(acceptance_probability(xs)) > 0)


def test_clicks_without_dark_counts(source):
    det = DetectorParams(dark_rate=0.0)
    la, lb = FiberLink(length=10.0), FiberLink(length=80.0)
    s = click_probabilities(source, la, lb, det, 4.0)
    assert s.p_dc == s.p_plus_minus == s.p_minus_plus == s.p_both_lost == 0.0
    assert s.p_exp == pytest.approx(10 ** (-0.2 * 90 / 10) * acceptance_probability(4.0), rel=1e-12)


def test_clicks_at_zero_length(source, detector):
    s = click_probabilities(source, FiberLink(), FiberLink(), detector, 3.0)
    eta = acceptance_probability(3.0)
    p_h = detector.dark_rate * 3.0 * heralded_width(source, FiberLink(), FiberLink())
    assert s.p_plus_minus == s.p_minus_plus == s.p_both_lost == 0.0
    assert s.p_exp == pytest.approx(eta + 4 * (1 - eta) * p_h, rel=1e-14)


def test_dark_count_term_hand_composed():
    src = SourceParams(SIGMA, SIGMA, 0.0)
    s = click_probabilities(src, FiberLink(), FiberLink(), DetectorParams(dark_rate=1e3), 6.0)
    p_h = 1e3 * 6 / SIGMA
    assert p_h == pytest.approx(4e-9)
    assert s.p_dc == pytest.approx(4 * (1 - _window_oracle(6.0)) * p_h, rel=1e-9)
    assert s.p_dc == pytest.approx(4.32e-11, rel=1e-3)


def test_clicks_reject_nonpositive_xi(source, detector):
    with pytest.raises(ValueError):
        click_probabilities(source, FiberLink(), FiberLink(), detector, 0.0)


def test_clamping_flags_invalid_linearization(source):
    det = DetectorParams(dark_rate=1e12)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        s = click_probabilities(source, FiberLink(length=50), FiberLink(length=50), det, 6.0)
    assert s.clamped
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    for p in (s.p_sign, s.p_dc, s.p_plus_minus, s.p_minus_plus, s.p_both_lost):
        assert 0.0 <= p <= 1.0


def _stats(p_sign, noise):
    return ClickStats(p_sign, noise, 0.0, 0.0, 0.0, p_sign + noise)


def test_qber_examples():
    assert qber(_stats(0.3, 0.0), DetectorParams()) == 0.0
    assert qber(_stats(0.0, 0.2), DetectorParams()) == 0.5
    assert qber(_stats(0.3, 0.0), DetectorParams(misalignment=0.05)) == pytest.approx(0.05)


def test_qber_no_signal():
    with pytest.raises(NoSignalError):
        qber(_stats(0.0, 0.0), DetectorParams())


def test_misalignment_adds_exact_term(source, detector):
    s = click_probabilities(source, FiberLink(length=30), FiberLink(length=150), detector, 2.0)
    q0 = qber(s, detector)
    assert q0 == (s.p_exp - s.p_sign) / (2 * s.p_exp)
    q1 = qber(s, DetectorParams(detector.dark_rate, 0.07))
    assert q1 - q0 == pytest.approx(0.07 * s.p_sign / s.p_exp, rel=1e-12, abs=1e-16)


def test_key_rate_noise_free_equals_p_exp(source):
    det = DetectorParams(dark_rate=0.0)
    res = key_rate(source, FiberLink(length=5), FiberLink(length=120), det, 6.0)
    assert res.qber == 0.0
    assert res.key_rate == res.stats.p_exp
    assert res.window == pytest.approx(6.0 * res.tau_h)


def test_key_rate_clamped_when_signal_vanishes(source, detector):
    res = key_rate(source, FiberLink(length=1), FiberLink(length=2000, attenuation=1.0), detector, 6.0)
    assert res.key_rate == 0.0


def test_key_rate_no_signal_path(source):
    res = key_rate(source, FiberLink(length=1e4, attenuation=1e3), FiberLink(), DetectorParams(0.0), 1.0)
    assert res.key_rate == 0.0
    assert "no_signal" in res.flags


def test_key_rate_positive_at_100km(source, detector):
    for xi in (1.0, 3.0, 6.0, 12.0):
        assert key_rate(source, FiberLink(length=1), FiberLink(length=100), detector, xi).key_rate > 0


def test_key_rate_monotone_in_noise(source):
    la, lb = FiberLink(length=20), FiberLink(length=190)
    for xi in (0.5, 2.0, 6.0):
        ks = [key_rate(source, la, lb, DetectorParams(d, 0.0), xi).key_rate for d in np.geomspace(1, 1e5, 60)]
        assert np.all(np.diff(ks) <= 0)
        ks = [key_rate(source, la, lb, DetectorParams(1e3, e), xi).key_rate for e in np.linspace(0, 0.5, 60)]
        assert np.all(np.diff(ks) <= 0)


def test_key_rate_vanishes_at_window_extremes(source, detector):
    la, lb = FiberLink(length=10), FiberLink(length=150)
    best = max(key_rate(source, la, lb, detector, xi).key_rate for xi in np.geomspace(0.01, 100, 400))
    assert key_rate(source, la, lb, detector, 1e-3).key_rate < best
    assert key_rate(source, la, lb, detector, 1e3).key_rate < best


@pytest.mark.parametrize("kwargs", [{"dark_rate": -1.0}, {"misalignment": 0.6}, {"misalignment": -0.1}])
def test_detector_validation(kwargs):
    with pytest.raises(ValueError):
        DetectorParams(**kwargs)
