import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rareion_cqed import coupling, ion_catalog
from rareion_cqed.coupling import RatesInput
from rareion_cqed.ion_catalog import IonTransition
from rareion_cqed.wgm_design import ResonatorSpec

from reference_values import PRINTED

# CODATA 2018, typed in by hand so the oracle does not share scipy's table
C0 = 299792458.0
EPS0 = 8.8541878128e-12
ME = 9.1093837015e-31
QE = 1.602176634e-19


def oracle_T_spon(wavelength, f, n):
    """Vacuum Einstein A from the oscillator strength, enhanced by n^2 in the host."""
    A_vac = 2 * math.pi * QE**2 * f / (EPS0 * ME * C0 * wavelength**2)
    return 1 / (A_vac * n**2)


def oracle_g(wavelength, f, n, V):
    """g from N0_pop Q / (beta T_spon chi_L) = kappa / g^2 ... solved for g."""
    chi = ((n * n + 2) / 3) ** 2
    beta = 8 * math.pi**2 * n**3 * V / (3 * wavelength**3)
    omega = 2 * math.pi * C0 / wavelength
    return math.sqrt(omega / (2 * beta * oracle_T_spon(wavelength, f, n) * chi))


CATALOG = ion_catalog.load_catalog()


@pytest.mark.parametrize("rec", CATALOG, ids=[r.id for r in CATALOG])
def test_spontaneous_time_matches_einstein_oracle(rec):
    expected = oracle_T_spon(rec.wavelength_vac, rec.oscillator_strength, rec.host_index)
    assert coupling.spontaneous_time(rec) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("rec", CATALOG, ids=[r.id for r in CATALOG])
def test_coupling_matches_oracle(rec):
    V = 1e-15
    expected = oracle_g(rec.wavelength_vac, rec.oscillator_strength, rec.host_index, V)
    assert coupling.coupling_g(rec, V) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("rec", CATALOG, ids=[r.id for r in CATALOG])
def test_reference_values_reproduced(rec):
    mu_ref, ts_ref, r1_ref, r2_ref = PRINTED[rec.id]
    ts = coupling.spontaneous_time(rec)
    assert coupling.dipole_moment(rec) / 1e-32 == pytest.approx(mu_ref, rel=0.05)
    assert ts * 1e3 == pytest.approx(ts_ref, rel=0.05)
    assert ts / rec.T1 == pytest.approx(r1_ref, rel=0.05)
    assert ts / rec.T2 == pytest.approx(r2_ref, rel=0.05)


def test_kappa_values():
    assert coupling.cavity_kappa(1536.14e-9, 1e8) == pytest.approx(6.1311e6, rel=1e-4)
    assert coupling.cavity_kappa(605.977e-9, 1e10) == pytest.approx(1.5542e5, rel=1e-4)
    with pytest.raises(ValueError):
        coupling.cavity_kappa(600e-9, 0)


def test_beta_value():
    assert coupling.beta_parameter(100e-18, 1.8, 1e-6) == pytest.approx(1.5349e4, rel=1e-4)


def test_local_field_factor_vacuum_is_one():
    assert coupling.local_field_factor(1.0) == 1.0


def test_spontaneous_time_depends_on_n_squared():
    rec = CATALOG[0]
    hi = IonTransition(rec.id, rec.wavelength_vac, rec.oscillator_strength, rec.T1, rec.T2,
                       rec.T2_field_note, 2 * rec.host_index)
    assert coupling.spontaneous_time(rec) / coupling.spontaneous_time(hi) == pytest.approx(4.0)


def test_rates_figures_trivial():
    r = RatesInput(g=1.0, kappa=2.0, gamma=0.1)
    assert r.gamma_h == pytest.approx(0.05)
    assert r.N0_pop == pytest.approx(0.2)
    assert r.N0_ph == pytest.approx(0.2)
    assert r.n0 == pytest.approx(0.00125)
    assert r.cooperativity == pytest.approx(10.0)


def test_rates_reject_bad_input():
    with pytest.raises(ValueError):
        RatesInput(g=1.0, kappa=-1.0, gamma=0.1)
    with pytest.raises(ValueError):
        RatesInput(g=0.0, kappa=1.0, gamma=0.1).N0_pop


def test_figures_need_mode_volume():
    res = ResonatorSpec(1e-3, 1.8, 606e-9, 1e9)
    with pytest.raises(coupling.MissingModeVolumeError, match="figures_for"):
        coupling.figures(CATALOG[0], res)


def test_figures_rates_consistent():
    rec = CATALOG[0]
    fig = coupling.figures(rec, ResonatorSpec.for_transition(rec, 1e-3, 1e9, 1e-14))
    assert fig.rates.N0_pop == pytest.approx(fig.N0_pop, rel=1e-9)
    assert fig.rates.N0_ph == pytest.approx(fig.N0_ph, rel=1e-9)
    assert fig.gamma_h == pytest.approx(1 / rec.T2)


@given(
    lam=st.floats(300e-9, 3e-6),
    f=st.floats(1e-10, 1e-4),
    n=st.floats(1.0, 3.0),
    V=st.floats(1e-18, 1e-9),
    Q=st.floats(1e3, 1e12),
    T1=st.floats(1e-6, 1e-1),
    frac=st.floats(1e-3, 2.0),
)
@settings(max_examples=200, deadline=None)
def test_beta_form_equals_rate_form(lam, f, n, V, Q, T1, frac):
    rec = IonTransition("x", lam, f, T1, frac * T1, "", n)
    fig = coupling.figures(rec, ResonatorSpec(1e-3, n, lam, Q, V))
    rates = RatesInput(fig.g, fig.kappa, 1 / T1, 1 / (frac * T1) - 1 / (2 * T1))
    assert np.isclose(fig.N0_pop, rates.N0_pop, rtol=1e-9, atol=0)
    assert np.isclose(fig.N0_ph, rates.N0_ph, rtol=1e-9, atol=0)
    assert np.isclose(fig.n0, rates.n0, rtol=1e-9, atol=0)


@given(V=st.floats(1e-18, 1e-9), s=st.floats(1.01, 100.0))
def test_g_scales_as_inverse_root_volume(V, s):
    rec = CATALOG[3]
    assert coupling.coupling_g(rec, V) / coupling.coupling_g(rec, s * V) == pytest.approx(math.sqrt(s))


def with_fields(rec, **kw):
    return dataclasses.replace(rec, **kw)


def test_dipole_scales_as_root_oscillator_strength():
    rec = CATALOG[0]
    quad = with_fields(rec, oscillator_strength=4 * rec.oscillator_strength)
    assert coupling.dipole_moment(quad) / coupling.dipole_moment(rec) == pytest.approx(2.0)
    # doubling mu quarters the lifetime and doubles g
    assert coupling.spontaneous_time(rec) / coupling.spontaneous_time(quad) == pytest.approx(4.0)
    assert coupling.coupling_g(quad, 1e-15) / coupling.coupling_g(rec, 1e-15) == pytest.approx(2.0)


def test_kappa_inverse_in_q():
    assert coupling.cavity_kappa(1e-6, 1e8) / coupling.cavity_kappa(1e-6, 2e8) == pytest.approx(2.0)


def test_beta_unit_volume_and_cubic_index():
    lam, n = 1.2e-6, 1.7
    assert coupling.beta_parameter(3 * lam**3 / (8 * math.pi**2 * n**3), n, lam) == pytest.approx(1.0)
    assert coupling.beta_parameter(1e-16, 2 * n, lam) / coupling.beta_parameter(1e-16, n, lam) == pytest.approx(8.0)


def test_rates_hz_example_and_trivial_limits():
    mhz = 2 * math.pi * 1e6
    r = RatesInput(g=1 * mhz, kappa=10 * mhz, gamma=0.01 * mhz)
    assert r.N0_pop == pytest.approx(0.1)
    assert r.N0_ph == r.N0_pop
    assert RatesInput(g=1.0, kappa=1.0, gamma=0.0).n0 == 0
