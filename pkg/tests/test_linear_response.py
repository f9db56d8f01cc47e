import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rareion_cqed import linear_response as lr
from rareion_cqed.integrator import rk4
from rareion_cqed.linear_response import ResponseSystem
from rareion_cqed.pulses import PulseSpec

MHZ = 2 * math.pi * 1e6
BAD = ResponseSystem(1 * MHZ, 10 * MHZ, 0.01 * MHZ)
GOOD = ResponseSystem(3.2 * MHZ, 0.32 * MHZ, 0.32 * MHZ)

systems = st.builds(
    ResponseSystem,
    g=st.floats(0, 10),
    kappa=st.floats(0.01, 10),
    gamma=st.floats(0.001, 10),
)


@given(systems, st.floats(-50, 50))
def test_closed_form_matches_linear_solve(system, delta):
    r_ss, e_ss = lr.steady_state_response(system, delta)
    assert lr.reflection(system, delta) == pytest.approx(r_ss[0], abs=1e-10)
    assert lr.emission(system, delta) == pytest.approx(e_ss[0], abs=1e-10)


@given(systems.filter(lambda s: abs(s.kappa - s.gamma / 2) > 1e-2 or s.g > 1e-2), st.floats(-50, 50))
@settings(max_examples=100)
def test_closed_form_matches_mode_expansion(system, delta):
    assert lr.reflection(system, delta) == pytest.approx(lr.modal_reflection(system, delta), abs=1e-8)


@given(systems, st.floats(-1e3, 1e3))
def test_energy_conservation(system, delta):
    p = lr.response_at(system, delta)
    assert abs(p.r) ** 2 + p.emission_prob == pytest.approx(1.0, abs=1e-12)


def test_empty_cavity_flips_sign_on_resonance():
    assert lr.response_at(BAD.empty(), 0.0).r == pytest.approx(-1.0)
    assert BAD.empty().cooperativity == 0


@pytest.mark.parametrize("system", [BAD, GOOD], ids=["bad", "good"])
def test_atom_shifts_resonant_phase_by_pi(system):
    with_atom = lr.response_at(system, 0.0).phase
    without = lr.response_at(system.empty(), 0.0).phase
    assert abs(abs(with_atom - without) - math.pi) < 1e-12


def test_impedance_matched_point():
    sys1 = ResponseSystem(math.sqrt(0.5 * 2.0 * 0.3), 2.0, 0.3)
    assert sys1.cooperativity == pytest.approx(1.0)
    p = lr.response_at(sys1, 0.0)
    assert abs(p.r) < 1e-12
    assert p.emission_prob == pytest.approx(1.0)


@given(st.floats(0, 100))
def test_zero_detuning_closed_form(C):
    (c, ph, em), = lr.cooperativity_sweep(1.3, 0.7, [C])
    r0, e0 = lr.zero_detuning_closed_form(C)
    g = math.sqrt(C * 1.3 * 0.7 / 2)
    assert lr.reflection(ResponseSystem(g, 1.3, 0.7), 0.0).real == pytest.approx(r0, abs=1e-12)
    assert em == pytest.approx(e0, abs=1e-12)


def test_bad_cavity_phase_band():
    s = ResponseSystem(1.0, 10.0, 0.01)
    sp = lr.spectrum(s, np.linspace(-1, 1, 200001))
    assert lr.phase_band_width(sp) == pytest.approx(2 * s.g**2 / s.kappa, rel=0.02)


def test_phase_band_needs_feature():
    sp = lr.spectrum(BAD.empty(), np.linspace(-1, 1, 11))
    with pytest.raises(ValueError):
        lr.phase_band_width(sp)


def test_good_cavity_emission_at_vacuum_rabi_peaks():
    s = ResponseSystem(3.2, 0.32, 0.32)
    peaks = lr.emission_peaks(lr.spectrum(s, np.linspace(-6, 6, 120001)))
    split = np.sort(np.abs(lr.poles(s).imag))
    assert len(peaks) == 2
    assert np.allclose(np.sort(np.abs(peaks)), split, rtol=2e-2)


def test_spectrum_csv():
    text = lr.spectrum(GOOD, np.linspace(-1e7, 1e7, 5)).to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(lr.SPECTRUM_HEADER)
    assert len(lines) == 6


def test_unwrapped_phase_is_continuous():
    sp = lr.spectrum(GOOD, np.linspace(-3e7, 3e7, 20001))
    assert np.max(np.abs(np.diff(sp.phase_unwrapped))) < 0.5


def test_fid_grid_meets_rules():
    t = lr.fid_grid(BAD)
    extent, resolution = lr.fid_requirements(BAD)
    dt = t[1] - t[0]
    assert 2 * math.pi / dt >= extent * (1 - 1e-12)
    assert 2 * math.pi / (len(t) * dt) <= resolution
    assert len(t) & (len(t) - 1) == 0


def test_fid_rejects_coarse_grids():
    t = lr.fid_grid(BAD)
    with pytest.raises(lr.GridError, match="extent"):
        lr.fid_signal(BAD, PulseSpec(t[::4], np.zeros(len(t[::4]))))
    with pytest.raises(lr.GridError, match="resolution"):
        lr.fid_signal(BAD, PulseSpec(t[: len(t) // 4], np.zeros(len(t) // 4)))


def test_fid_matches_time_domain_integration():
    # small system: RK4 on the same linear model must give the FFT answer
    s = ResponseSystem(0.5, 4.0, 0.1)
    t = lr.fid_grid(s, oversample=4)
    probe = lr.gaussian_probe(s, 1.0, t)
    out = lr.fid_signal(s, probe)
    keep = t <= 60
    tt = t[keep]
    h = tt[1] - tt[0]
    # probe drive sampled exactly on RK4 stages via the analytic Gaussian
    sigma, centre = 1 / s.kappa, 10 / s.kappa
    drive = lambda x: math.exp(-((x - centre) ** 2) / (2 * sigma**2))
    M = s.drift_matrix()
    k = math.sqrt(2 * s.kappa)

    def f(x, y):
        return M @ y - np.array([k * drive(x), 0])

    ys = rk4(f, np.zeros(2), tt)
    direct = np.array([drive(x) for x in tt]) + k * ys[:, 0]
    assert np.max(np.abs(out.values[keep] - direct)) < 1e-6


def test_fid_tail_rate_bad_cavity():
    s = ResponseSystem(1.0, 100.0, 0.01)
    out = lr.fid_signal(s, lr.gaussian_probe(s))
    rate = lr.fit_decay_rate(out, 1.0, 200.0)
    assert rate == pytest.approx(lr.effective_decay_rate(s), rel=0.02)
    assert lr.slow_pole_rate(s) == pytest.approx(lr.effective_decay_rate(s), rel=1e-3)


def test_fid_csv():
    s = ResponseSystem(1.0, 10.0, 1.0)
    out = lr.fid_signal(s, lr.impulse_probe(s))
    lines = lr.fid_to_csv(PulseSpec(out.t[:10], out.values[:10])).splitlines()
    assert lines[0] == "t,out_re,out_im,abs"
    assert len(lines) == 11


def test_validation():
    with pytest.raises(ValueError):
        ResponseSystem(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        ResponseSystem(-1.0, 1.0, 1.0)


def test_impulse_fid_bad_cavity():
    out = lr.fid_signal(BAD, lr.impulse_probe(BAD))
    rate = lr.effective_decay_rate(BAD)
    assert lr.fit_decay_rate(out, 0.3 / rate, 3 / rate) == pytest.approx(rate, rel=0.05)


def test_fid_without_atom_has_no_slow_tail():
    s = BAD.empty()
    out = lr.fid_signal(s, lr.gaussian_probe(BAD, t=lr.fid_grid(BAD)))
    late = out.t > 50 / s.kappa
    assert np.max(np.abs(out.values[late])) < 1e-12 * np.max(np.abs(out.values))
    assert np.all(lr.spectrum(s, np.linspace(-1e8, 1e8, 101)).emission_prob == 0)


def test_far_detuned_probe_passes_unchanged():
    s = ResponseSystem(1.0, 10.0, 0.1)
    t = lr.fid_grid(s, oversample=64)
    sigma, carrier = 1.0, 2000.0
    probe = PulseSpec(t, np.exp(-((t - 10) ** 2) / (2 * sigma**2) + 1j * carrier * t))
    out = lr.fid_signal(s, probe)
    assert np.max(np.abs(out.values - probe.values)) < 0.02


@given(systems, st.floats(-50, 50))
def test_reflection_symmetric_in_detuning(system, delta):
    assert lr.reflection(system, -delta) == pytest.approx(np.conj(lr.reflection(system, delta)), abs=1e-12)


@given(systems.filter(lambda s: s.g > 0.05), st.floats(-50, 50))
def test_poles_are_drift_eigenvalues(system, delta):
    for lam in lr.poles(system):
        # D as a polynomial in i delta vanishes at each eigenvalue of the drift matrix
        D = system.g**2 + (lam + system.gamma / 2) * (lam + system.kappa)
        assert abs(D) < 1e-9 * (system.g**2 + abs(lam) ** 2)
    assert lr.reflection(system, delta) == pytest.approx(lr.modal_reflection(system, delta), rel=1e-9, abs=1e-12)


@given(g=st.floats(0.01, 1.0), ratio=st.floats(100, 1e4), gamma=st.floats(0, 0.1))
def test_slow_pole_is_eliminated_rate_in_bad_cavity(g, ratio, gamma):
    s = ResponseSystem(g, ratio * g, gamma)
    assert lr.slow_pole_rate(s) == pytest.approx(lr.effective_decay_rate(s), rel=0.02)
