import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phononcool.model import ModelParams, dress, mixing_angle, thermal_occupation

BASE = dict(omega_ph=2.0, delta=0.0, rabi=1.0, g=0.3, gamma=0.05, gamma_c=0.01, kappa=0.5, nbar=1.0)


def params(**kw):
    return ModelParams(**{**BASE, **kw})


def bose_mp(x):
    mpmath.mp.dps = 40
    return float(1 / mpmath.expm1(mpmath.mpf(x)))


class TestThermalOccupation:
    def test_zero_temperature(self):
        assert thermal_occupation(2.0, 0.0, 1.0) == 0.0

    def test_ln2_gives_one(self):
        # hbar_over_kB * omega / T = ln 2
        assert thermal_occupation(math.log(2.0), 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_against_extended_precision(self):
        value = thermal_occupation(0.1, 1.0, 1.0)
        assert value == pytest.approx(bose_mp("0.1"), rel=1e-13)
        assert value == pytest.approx(9.5083, abs=5e-5)

    @given(st.floats(1e-6, 600.0))
    def test_matches_mpmath(self, x):
        assert thermal_occupation(x, 1.0, 1.0) == pytest.approx(bose_mp(x), rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            thermal_occupation(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            thermal_occupation(1.0, -1.0, 1.0)


class TestModelParams:
    @pytest.mark.parametrize(
        "field, value",
        [("omega_ph", 0.0), ("kappa", 0.0), ("rabi", -1.0), ("g", -0.1), ("nbar", -1.0), ("gamma", math.nan)],
    )
    def test_invalid(self, field, value):
        with pytest.raises(ValueError):
            params(**{field: value})

    def test_zero_rabi_allowed_off_resonance(self):
        d = dress(params(rabi=0.0, delta=1.0), secular=True)
        assert d.theta == 0.0

    def test_zero_rabi_on_resonance_rejected(self):
        with pytest.raises(ValueError):
            dress(params(rabi=0.0, delta=0.0), secular=True)


class TestDress:
    def test_resonance(self):
        d = dress(params(gamma=0.2, gamma_c=0.04), secular=True)
        assert d.theta == pytest.approx(math.pi / 4)
        assert d.omega_bar == 1.0
        assert d.gamma_plus == pytest.approx(0.2 / 4 + 0.04 / 4, rel=1e-14)
        assert d.gamma_minus == pytest.approx(0.2 / 4 + 0.04 / 4, rel=1e-14)
        assert d.gamma_0 == pytest.approx(0.2 / 4, rel=1e-14)
        assert d.delta_bar == 0.0 and d.beta == 0.0

    def test_resonance_beyond_secular(self):
        g, w = 0.3, 2.0
        d = dress(params(g=g, omega_ph=w), secular=False)
        assert d.delta_bar == pytest.approx(-(g**2) / (8 * (w + 2.0)), rel=1e-12)
        assert d.beta == pytest.approx(g**2 / (4 * (w + 2.0)), rel=1e-14)

    def test_delta_two_rabi(self):
        d = dress(params(delta=2.0), secular=True)
        assert d.theta == pytest.approx(math.pi / 8, rel=1e-14)
        assert d.omega_bar == pytest.approx(math.sqrt(2.0), rel=1e-15)

    def test_coupling_and_detuning(self):
        d = dress(params(delta=1.0), secular=True)
        assert d.coupling == pytest.approx(0.5 * 0.3 * math.sin(2 * d.theta))
        assert d.effective_detuning == pytest.approx(2.0 - 2.0 * math.sqrt(1.25))

    def test_delta_bar_sign_at_theta_zero(self):
        # theta -> 0 as delta -> +inf
        d = dress(params(delta=1e9, g=0.3), secular=False)
        assert d.delta_bar == pytest.approx(0.09 / (2 * 2.0), rel=1e-6)
        assert dress(params(delta=0.0), secular=False).delta_bar < 0

    def test_warnings_only(self):
        d = dress(params(gamma=1.0, g=0.9), secular=False)
        assert len(d.warnings) == 2
        assert dress(params(), secular=False).warnings == ()

    def test_deterministic(self):
        assert dress(params(delta=0.37), False) == dress(params(delta=0.37), False)


finite = dict(allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(
    delta=st.floats(-50, 50, **finite),
    rabi=st.floats(1e-3, 10, **finite),
    g=st.floats(0, 2, **finite),
    gamma=st.floats(0, 1, **finite),
    gamma_c=st.floats(0, 1, **finite),
)
def test_dressed_invariants(delta, rabi, g, gamma, gamma_c):
    p = params(delta=delta, rabi=rabi, g=g, gamma=gamma, gamma_c=gamma_c)
    sec, full = dress(p, True), dress(p, False)
    assert sec.omega_bar >= rabi
    for d in (sec, full):
        assert min(d.gamma_plus, d.gamma_minus, d.gamma_0) >= 0
        c, s = math.cos(d.theta), math.sin(d.theta)
        assert d.gamma_plus + d.gamma_minus >= gamma * (c**4 + s**4) * (1 - 1e-12)
        assert 0 < d.theta < math.pi / 2
    assert full.beta >= 0
    assert sec.delta_bar == 0 and sec.beta == 0
    strip = lambda d: {k: v for k, v in vars(d).items() if k not in ("delta_bar", "beta", "secular")}
    assert strip(sec) == strip(full)


@given(st.floats(-100, 100, **finite), st.floats(1e-3, 10, **finite), st.floats(1e-3, 10, **finite))
def test_theta_strictly_decreasing(delta, rabi, step):
    assert mixing_angle(delta + step, rabi) < mixing_angle(delta, rabi)


def test_theta_limits():
    assert mixing_angle(1e12, 1.0) == pytest.approx(0.0, abs=1e-11)
    assert mixing_angle(-1e12, 1.0) == pytest.approx(math.pi / 2, abs=1e-11)
    # continuous through resonance
    assert mixing_angle(-1e-9, 1.0) == pytest.approx(mixing_angle(1e-9, 1.0), abs=1e-9)
