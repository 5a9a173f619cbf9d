import math

import pytest

from dispersive_qkd.devices import (
    DEFAULT_CATALOG,
    DispersiveDevice,
    device_locus,
    dispersion_to_delay,
    load_catalog,
    locus_key_rates,
)
from dispersive_qkd.optimize import optimize_window
from dispersive_qkd.physics import FiberLink

SMF = DEFAULT_CATALOG[0]
MODULE = DispersiveDevice("module", "discrete-module", 4.0, 1.2e-21)


def test_smf_locus_at_100km():
    (disp, loss), = device_locus(SMF, [100.0])
    assert disp == pytest.approx(1.15e-21, rel=1e-12)
    assert loss == pytest.approx(20.0, rel=1e-12)


def test_zero_amount_is_origin():
    for dev in (*DEFAULT_CATALOG, MODULE):
        assert device_locus(dev, [0]) == [(0.0, 0.0)]


def test_module_multiples():
    assert device_locus(MODULE, [2]) == [pytest.approx((2.4e-21, 8.0))]
    with pytest.raises(ValueError, match="integer"):
        device_locus(MODULE, [1.5])


def test_locus_rejects_negative_amount():
    with pytest.raises(ValueError):
        device_locus(SMF, [-1.0])


def test_locus_is_linear():
    pts = device_locus(SMF, [10.0, 30.0])
    assert pts[1][0] == pytest.approx(3 * pts[0][0])
    assert pts[1][1] == pytest.approx(3 * pts[0][1])


def test_dispersion_to_delay():
    # 2 pi c / lambda^2 evaluated by hand at 1550 nm
    per_nm_ps = dispersion_to_delay(1e-21, 1550e-9) * 1e3
    assert per_nm_ps == pytest.approx(2 * math.pi * 299792458 / 1550e-9**2 * 1e-21 * 1e3, rel=1e-12)
    assert 783 <= per_nm_ps <= 785
    assert dispersion_to_delay(0.0, 1550e-9) == 0.0
    assert dispersion_to_delay(2e-21, 1550e-9) == pytest.approx(2 * dispersion_to_delay(1e-21, 1550e-9))
    with pytest.raises(ValueError):
        dispersion_to_delay(1e-21, 0.0)


def test_smf_locus_round_trip_with_fiber_link(source, detector):
    link_b = FiberLink(length=205)
    lengths = [0.0, 40.0, 120.0]
    rates = locus_key_rates(SMF, lengths, source, link_b, detector)
    for length, (_, _, k) in zip(lengths, rates):
        ref = optimize_window(source, FiberLink(length=length), link_b, detector).key_rate
        assert k == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_default_catalog_marks_assumptions():
    assert not SMF.assumed
    assert all(d.assumed for d in DEFAULT_CATALOG[1:])


def test_device_validation():
    with pytest.raises(ValueError, match="kind"):
        DispersiveDevice("x", "prism", 0.1, 1e-23)
    with pytest.raises(ValueError, match="alpha"):
        DispersiveDevice("x", "continuous-fiber", -0.1, 1e-23)


def test_load_catalog(tmp_path):
    path = tmp_path / "catalog.yaml"
    path.write_text(
        "devices:\n"
        "  - {name: SMF, kind: continuous-fiber, alpha: 0.2, beta: 1.15e-23}\n"
        "  - {name: box, kind: discrete-module, alpha: 3.0, beta: 2.0e-21, assumed: true}\n"
    )
    devs = load_catalog(path)
    assert devs[0] == DispersiveDevice("SMF", "continuous-fiber", 0.2, 1.15e-23)
    assert devs[1].assumed and devs[1].beta == 2.0e-21


@pytest.mark.parametrize("text, match", [
    ("[]", "devices"),
    ("devices:\n  - {name: a, kind: continuous-fiber, alpha: 0.2}\n", "missing"),
    ("devices:\n  - {name: a, kind: continuous-fiber, alpha: 0.2, beta: 1, colour: red}\n", "unknown"),
])
def test_load_catalog_errors(tmp_path, text, match):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    with pytest.raises(ValueError, match=match):
        load_catalog(path)
