"""Weak-probe response of a cavity with one resonant dopant.

Below saturation the atom behaves as a second harmonic oscillator s, and in
the frame of a probe detuned by delta from the common resonance

    d/dt [a, s] = M [a, s] - diag(sqrt(2 kappa), sqrt(gamma)) [a_in, s_in],
    M = [[-kappa - i delta, g], [-g, -gamma/2 - i delta]],

with a_out = a_in + sqrt(2 kappa) a and s_out = s_in + sqrt(gamma) s. The
steady state gives the reflection r = a_out / a_in and the amplitude
e = s_out / a_in scattered into free space, both over
D = g^2 + (i delta + gamma/2)(i delta + kappa).

Time signals use the e^{+i delta t} convention of that frame, which is the
sign numpy's inverse FFT applies.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .pulses import PulseSpec

SPECTRUM_HEADER = ("delta_rad_s", "r_re", "r_im", "phase_unwrapped", "emission_prob")
FID_HEADER = ("t", "out_re", "out_im", "abs")

FID_EXTENT_KAPPAS = 20.0
FID_RESOLUTION_DIVISOR = 10.0


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class ResponseSystem:
    g: float
    kappa: float
    gamma: float
    atom_present: bool = True

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not (self.gamma >= 0 and self.g >= 0):
            raise ValueError("g and gamma must be non-negative")

    @property
    def g_eff(self) -> float:
        return self.g if self.atom_present else 0.0

    @property
    def cooperativity(self) -> float:
        return 2 * self.g_eff**2 / (self.kappa * self.gamma)

    def empty(self) -> "ResponseSystem":
        return ResponseSystem(self.g, self.kappa, self.gamma, atom_present=False)

    def drift_matrix(self) -> np.ndarray:
        """M at zero detuning; M(delta) = M(0) - i delta I."""
        return np.array([[-self.kappa, self.g_eff], [-self.g_eff, -self.gamma / 2]], dtype=complex)


@dataclass(frozen=True)
class SpectralPoint:
    delta: float
    r: complex
    e: complex

    @property
    def phase(self) -> float:
        return math.atan2(self.r.imag, self.r.real)

    @property
    def emission_prob(self) -> float:
        return abs(self.e) ** 2


def denominator(system: ResponseSystem, delta):
    x = 1j * np.asarray(delta, dtype=float)
    return system.g_eff**2 + (x + system.gamma / 2) * (x + system.kappa)


def reflection(system: ResponseSystem, delta):
    x = 1j * np.asarray(delta, dtype=float)
    D = denominator(system, delta)
    if np.any(D == 0):
        raise ZeroDivisionError("response denominator vanished")
    return (system.g_eff**2 + (x + system.gamma / 2) * (x - system.kappa)) / D


def emission(system: ResponseSystem, delta):
    """Free-space amplitude per unit input; only |e|^2 is convention-independent."""
    D = denominator(system, delta)
    return math.sqrt(2 * system.kappa * system.gamma) * system.g_eff / D


def response_at(system: ResponseSystem, delta: float) -> SpectralPoint:
    return SpectralPoint(float(delta), complex(reflection(system, delta)), complex(emission(system, delta)))


@dataclass
class Spectrum:
    delta: np.ndarray
    r: np.ndarray
    e: np.ndarray

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.r)

    @property
    def phase_unwrapped(self) -> np.ndarray:
        """Phase continued along the sweep, anchored so the first point is principal."""
        return np.unwrap(np.angle(self.r))

    @property
    def emission_prob(self) -> np.ndarray:
        return np.abs(self.e) ** 2

    def points(self) -> list[SpectralPoint]:
        return [SpectralPoint(float(d), complex(r), complex(e))
                for d, r, e in zip(self.delta, self.r, self.e)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for d, r, ph, p in zip(self.delta, self.r, self.phase_unwrapped, self.emission_prob):
            w.writerow([repr(float(d)), repr(float(r.real)), repr(float(r.imag)),
                        repr(float(ph)), repr(float(p))])
        return buf.getvalue()


def spectrum(system: ResponseSystem, deltas) -> Spectrum:
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.isfinite(deltas)):
        raise ValueError("detuning grid must be finite")
    return Spectrum(deltas, reflection(system, deltas), emission(system, deltas))


def cooperativity_sweep(kappa: float, gamma: float, C_values):
    """(C, phase of r(0), |e(0)|^2) for g chosen so that 2 g^2 / (kappa gamma) = C."""
    rows = []
    for C in np.asarray(C_values, dtype=float):
        if C < 0:
            raise ValueError("cooperativity must be non-negative")
        g = math.sqrt(C * kappa * gamma / 2)
        p = response_at(ResponseSystem(g, kappa, gamma), 0.0)
        rows.append((float(C), p.phase, p.emission_prob))
    return rows


def zero_detuning_closed_form(C):
    """r(0) = (C - 1)/(C + 1) and |e(0)|^2 = 4C/(1 + C)^2."""
    C = np.asarray(C, dtype=float)
    return (C - 1) / (C + 1), 4 * C / (1 + C) ** 2


def steady_state_response(system: ResponseSystem, delta):
    """(r, e) from a direct linear solve of the steady state at each detuning."""
    K = np.diag([math.sqrt(2 * system.kappa), math.sqrt(system.gamma)])
    M0 = system.drift_matrix()
    rs, es = [], []
    for d in np.atleast_1d(np.asarray(delta, dtype=float)):
        a, s = np.linalg.solve(M0 - 1j * d * np.eye(2), K @ np.array([1.0, 0.0]))
        rs.append(1 + K[0, 0] * a)
        es.append(K[1, 1] * s)
    return np.array(rs), np.array(es)


def poles(system: ResponseSystem) -> np.ndarray:
    """Eigenvalues of the drift matrix: the complex rates of the free response."""
    return np.linalg.eigvals(system.drift_matrix())


def modal_reflection(system: ResponseSystem, delta):
    """r(delta) assembled from the eigenmode expansion of the drift matrix."""
    lam, V = np.linalg.eig(system.drift_matrix())
    Vinv = np.linalg.inv(V)
    weights = V[0, :] * Vinv[:, 0]
    x = 1j * np.asarray(delta, dtype=float)[..., None]
    inv11 = np.sum(weights / (lam - x), axis=-1)
    return 1 + 2 * system.kappa * inv11


def effective_decay_rate(system: ResponseSystem) -> float:
    """Atomic decay with the cavity eliminated: g^2 / kappa + gamma / 2."""
    return system.g_eff**2 / system.kappa + system.gamma / 2


def slow_pole_rate(system: ResponseSystem) -> float:
    return float(-np.max(poles(system).real))


def phase_band_width(sp: Spectrum) -> float:
    """Full width between the |phase| = pi/2 crossings around delta = 0."""
    ph = np.abs(sp.phase)
    i0 = int(np.argmin(np.abs(sp.delta)))
    if ph[i0] >= math.pi / 2:
        raise ValueError("no narrow phase feature at zero detuning")

    def crossing(indices):
        prev = i0
        for i in indices:
            if ph[i] >= math.pi / 2:
                f = (math.pi / 2 - ph[prev]) / (ph[i] - ph[prev])
                return sp.delta[prev] + f * (sp.delta[i] - sp.delta[prev])
            prev = i
        raise ValueError("phase never reaches pi/2 inside the grid")

    return float(crossing(range(i0 + 1, len(ph))) - crossing(range(i0 - 1, -1, -1)))


def emission_peaks(sp: Spectrum) -> np.ndarray:
    """Detunings of the local maxima of the emission probability."""
    p = sp.emission_prob
    idx = np.where((p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:]))[0] + 1
    return sp.delta[idx]


def fid_requirements(system: ResponseSystem) -> tuple[float, float]:
    """(minimum frequency extent, maximum frequency resolution) in rad/s.

    The extent also covers the vacuum-Rabi peaks at +/- g when g > kappa.
    """
    extent = FID_EXTENT_KAPPAS * max(system.kappa, system.g_eff)
    rates = [x for x in (system.gamma / 2, system.g_eff**2 / system.kappa) if x > 0]
    narrow = min(rates) if rates else system.kappa
    return extent, narrow / FID_RESOLUTION_DIVISOR


def fid_grid(system: ResponseSystem, oversample: float = 1.0) -> np.ndarray:
    """Power-of-two time grid meeting the FID frequency-grid rules."""
    extent, resolution = fid_requirements(system)
    dt = 2 * math.pi / (extent * oversample)
    n = 1 << int(math.ceil(math.log2(2 * math.pi / (resolution * dt))))
    return dt * np.arange(n)


def impulse_probe(system: ResponseSystem, t=None) -> PulseSpec:
    t = fid_grid(system) if t is None else np.asarray(t, dtype=float)
    v = np.zeros(len(t), dtype=complex)
    v[0] = 1.0 / (t[1] - t[0])
    return PulseSpec(t, v)


def gaussian_probe(system: ResponseSystem, width_kappas: float = 1.0, t=None) -> PulseSpec:
    """Brief Gaussian probe of rms duration ``width_kappas / kappa``, 10 widths after t[0].

    Band-limited well inside the FID grid, so the reflected tail is free of the
    ringing an ideal impulse leaves at the cavity's step response.
    """
    t = fid_grid(system) if t is None else np.asarray(t, dtype=float)
    sigma = width_kappas / system.kappa
    centre = t[0] + 10 * sigma
    return PulseSpec(t, np.exp(-((t - centre) ** 2) / (2 * sigma**2)).astype(complex))


def fid_signal(system: ResponseSystem, probe: PulseSpec) -> PulseSpec:
    """Reflected field for a weak probe pulse (periodic on the probe window).

    The probe's sampling defines the frequency grid: extent 2 pi / dt and
    resolution 2 pi / (N dt). Both must resolve the cavity line and the narrow
    atomic feature.
    """
    t = probe.t
    dt = probe.dt
    n = len(t)
    extent, resolution = fid_requirements(system)
    have_extent = 2 * math.pi / dt
    have_res = 2 * math.pi / (n * dt)
    if have_extent < extent * (1 - 1e-12):
        raise GridError(
            f"frequency extent {have_extent:.4g} rad/s < required {extent:.4g} rad/s "
            f"(20 max(kappa, g)); use dt <= {2 * math.pi / extent:.4g} s"
        )
    if have_res > resolution * (1 + 1e-12):
        raise GridError(
            f"frequency resolution {have_res:.4g} rad/s > required {resolution:.4g} rad/s; "
            f"use a window of at least {2 * math.pi / resolution:.4g} s"
        )
    spec = np.fft.fft(probe.values)
    delta = 2 * math.pi * np.fft.fftfreq(n, dt)
    out = np.fft.ifft(spec * reflection(system, delta))
    return PulseSpec(t, out)


def fit_decay_rate(pulse: PulseSpec, t_min: float, t_max: float) -> float:
    """Exponential rate from a least-squares line through log|signal|."""
    sel = (pulse.t >= t_min) & (pulse.t <= t_max)
    y = np.abs(pulse.values[sel])
    if sel.sum() < 3 or np.any(y <= 0):
        raise ValueError("fit window needs at least three non-zero samples")
    slope = np.polyfit(pulse.t[sel], np.log(y), 1)[0]
    return float(-slope)


def fid_to_csv(pulse: PulseSpec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FID_HEADER)
    for t, v in zip(pulse.t, pulse.values):
        w.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))])
    return buf.getvalue()
