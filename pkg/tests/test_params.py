"""Unit tests for parameters, unit conversion, and config parsing."""

import json
import math

import numpy as np
import pytest

from ionsense import params
from ionsense.params import (
    ConfigError,
    InvalidParameterError,
    IonSpecies,
    derive_internal,
    fig2_defaults,
    fig4_defaults,
    ground_state_spread,
    parse_config,
    serialize_config,
    yb171,
)

HBAR = params.HBAR_SI


def test_spread_unit_cancellation():
    """mass = 1 kg, freq = hbar/2 rad/s makes every factor cancel to 1 m."""
    ion = IonSpecies(mass=1.0, label="unit")
    assert ground_state_spread(ion, HBAR / 2.0) == pytest.approx(1.0, abs=1e-15)


def test_spread_yb171_hand_value():
    # hand evaluation with CODATA hbar and atomic mass unit: 5.4364e-9 m
    z0 = ground_state_spread(yb171(), 2 * math.pi * 1e6)
    assert z0 == pytest.approx(5.4364e-9, abs=5e-13)


def test_spread_sqrt_scaling():
    ion = yb171()
    assert ground_state_spread(ion, 2e6) == pytest.approx(
        ground_state_spread(ion, 1e6) / math.sqrt(2.0), rel=1e-14)


@pytest.mark.parametrize("factor", [1.5, 3.0, 10.0])
def test_spread_monotone_in_mass_and_freq(factor):
    ion = yb171()
    heavier = IonSpecies(mass=ion.mass * factor, label="x")
    assert ground_state_spread(heavier, 1e6) < ground_state_spread(ion, 1e6)
    assert ground_state_spread(ion, 1e6 * factor) < ground_state_spread(ion, 1e6)


def test_spread_domain_errors():
    with pytest.raises(InvalidParameterError):
        ground_state_spread(yb171(), 0.0)
    with pytest.raises(InvalidParameterError):
        IonSpecies(mass=-1.0, label="bad")


def test_derive_zero_force():
    p = fig2_defaults(drive={"F": 0.0})
    ip = derive_internal(p)
    assert ip.rabi == 0.0
    assert ip.force_coef == 0.0


def test_derive_fourpod_phi_symmetry():
    p = fig4_defaults(drive={"Fx": 1e-23, "Fy": 1e-23})
    assert derive_internal(p).phi == pytest.approx(math.pi / 4)


def test_derive_fig2_reference_set():
    ip = fig2_defaults().internal()
    assert ip.rabi != 0.0 and np.isfinite(ip.rabi)
    # auto detuning compensates the second-order shift: -g^2/omega
    assert ip.delta == pytest.approx(-ip.g**2 / ip.omega, rel=1e-14)


def test_derive_fourpod_auto_detuning():
    ip = fig4_defaults().internal()
    assert ip.delta == pytest.approx(-2.0 * ip.g**2 / ip.omega, rel=1e-14)


def test_force_sign_flip():
    ip_plus = fig2_defaults(drive={"F": 3.5e-23}).internal()
    ip_minus = fig2_defaults(drive={"F": -3.5e-23}).internal()
    assert ip_plus.beta == pytest.approx(-ip_minus.beta, rel=1e-14)
    assert abs(ip_plus.rabi) == pytest.approx(abs(ip_minus.rabi), rel=1e-14)
    # magnitude convention: |Omega| = z0 |F| g / (2 hbar omega)
    p = fig2_defaults(drive={"F": -3.5e-23})
    ip = p.internal()
    expect = (ip.spread * 3.5e-23 * p.drive.g / (2 * HBAR * p.drive.omega)) * 1e-3
    assert abs(ip.rabi) == pytest.approx(expect, rel=1e-12)


def test_derive_requires_nonzero_omega():
    with pytest.raises(InvalidParameterError):
        params.DriveParams(g=1.0, omega=0.0, xi=0.0, force=(1.0,))


MINIMAL = {
    "protocol": {"kind": "lambda"},
    "drive": {"g": 4e3, "omega": 150e3, "xi": 0.3, "F": -1e-23},
}


def test_parse_minimal_defaults():
    p = parse_config(json.dumps(MINIMAL))
    assert p.drive.delta is None  # auto
    assert p.run.n_max == 15
    assert p.ion.label == "171Yb+"
    # cyclic convention: Hz inputs scaled by 2 pi
    assert p.drive.g == pytest.approx(2 * math.pi * 4e3)


def test_parse_rejects_zero_omega():
    bad = {**MINIMAL, "drive": {**MINIMAL["drive"], "omega": 0.0}}
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert "omega" in str(err.value)


def test_parse_rejects_unknown_key():
    bad = {**MINIMAL, "drive": {**MINIMAL["drive"], "wavelength": 355}}
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert "wavelength" in str(err.value)


def test_parse_rejects_unknown_section():
    with pytest.raises(ConfigError):
        parse_config({**MINIMAL, "laser": {}})


def test_parse_missing_key_names_it():
    bad = {"protocol": {"kind": "lambda"},
           "drive": {"g": 4e3, "omega": 150e3, "xi": 0.3}}
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert "drive.F" in str(err.value)


def test_parse_non_numeric_value():
    bad = {**MINIMAL, "drive": {**MINIMAL["drive"], "g": "big"}}
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert "drive.g" in str(err.value)


def test_xi_normalized_to_principal_range():
    p = parse_config({**MINIMAL, "drive": {**MINIMAL["drive"], "xi": 2.3 * math.pi}})
    assert 0.0 <= p.drive.xi < 2 * math.pi
    assert p.drive.xi == pytest.approx(0.3 * math.pi)


@pytest.mark.parametrize("build", [fig2_defaults, fig4_defaults])
def test_round_trip_identity(build):
    p = build()
    assert parse_config(serialize_config(p)) == p


def test_round_trip_explicit_delta_and_angular():
    p = parse_config({
        "protocol": {"kind": "fourpod", "frequency_convention": "angular"},
        "drive": {"g": 2e4, "omega": 9e5, "xi": 0.51 * math.pi,
                  "Fx": -3.5e-23, "Fy": -3e-23, "delta": -1.2e3},
        "run": {"n_max": 8, "seed": 7, "times": [0.0, 1.5]},
    })
    assert parse_config(serialize_config(p)) == p
    assert p.drive.g == 2e4  # angular: taken as rad/s


def test_fourpod_reference_round_trip():
    p = fig4_defaults()
    again = parse_config(serialize_config(p))
    assert again.drive.force == p.drive.force == (-35e-24, -30e-24)
