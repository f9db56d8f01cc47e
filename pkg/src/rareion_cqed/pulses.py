"""Single-photon flux amplitudes on uniform time grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .integrator import check_uniform


@dataclass
class PulseSpec:
    """Complex flux amplitude beta(t) sampled on a uniform grid (units s^-1/2)."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.t.shape != self.values.shape:
            raise ValueError("grid and values must have the same shape")
        check_uniform(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def normalization(self) -> float:
        return float(np.trapezoid(np.abs(self.values) ** 2, self.t))

    def normalized(self) -> "PulseSpec":
        norm = self.normalization
        if norm == 0:
            return PulseSpec(self.t.copy(), self.values.copy())
        return PulseSpec(self.t.copy(), self.values / math.sqrt(norm))

    def scaled(self, c: complex) -> "PulseSpec":
        return PulseSpec(self.t.copy(), c * self.values)

    def asymmetry(self) -> float:
        """max |beta(t) - beta(T - t)| relative to max |beta|."""
        peak = np.max(np.abs(self.values))
        if peak == 0:
            return 0.0
        return float(np.max(np.abs(self.values - self.values[::-1])) / peak)


class TargetPulse:
    """Interface used by the control synthesis: value and two time derivatives."""

    t: np.ndarray

    def value(self, t):
        raise NotImplementedError

    def d1(self, t):
        raise NotImplementedError

    def d2(self, t):
        raise NotImplementedError

    def sampled(self) -> PulseSpec:
        return PulseSpec(self.t, self.value(self.t))

    def rms_duration(self) -> float:
        p = np.abs(self.value(self.t)) ** 2
        w = np.trapezoid(p, self.t)
        if w == 0:
            return 0.0
        mean = np.trapezoid(self.t * p, self.t) / w
        return float(math.sqrt(np.trapezoid((self.t - mean) ** 2 * p, self.t) / w))


class GaussianPulse(TargetPulse):
    """exp(-(t - t0)^2 / 2 sigma^2) on [t0 - w sigma, t0 + w sigma], unit photon number.

    The normalisation is exact over the truncated window, and derivatives are
    analytic.
    """

    def __init__(self, sigma: float, t0: float | None = None, dt: float | None = None,
                 truncation: float = 5.0, amplitude: float = 1.0):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        self.sigma = float(sigma)
        self.t0 = float(truncation * sigma if t0 is None else t0)
        self.truncation = float(truncation)
        start = self.t0 - truncation * sigma
        stop = self.t0 + truncation * sigma
        if dt is None:
            dt = sigma / 200
        n = max(2, int(math.ceil((stop - start) / dt)))
        self.t = np.linspace(start, stop, n + 1)
        # integral of exp(-(t-t0)^2/sigma^2) over the window
        window_norm = math.sqrt(math.pi) * sigma * erf(truncation)
        self.amplitude = amplitude / math.sqrt(window_norm)

    def _g(self, t):
        return self.amplitude * np.exp(-((np.asarray(t) - self.t0) ** 2) / (2 * self.sigma**2))

    def value(self, t):
        return self._g(t)

    def d1(self, t):
        return -(np.asarray(t) - self.t0) / self.sigma**2 * self._g(t)

    def d2(self, t):
        x = np.asarray(t) - self.t0
        return (x**2 / self.sigma**4 - 1 / self.sigma**2) * self._g(t)


class SampledPulse(TargetPulse):
    """User-supplied samples; derivatives from central differences, cubic in between."""

    def __init__(self, pulse: PulseSpec, normalize: bool = True):
        from scipy.interpolate import CubicSpline

        pulse = pulse.normalized() if normalize else pulse
        self.t = pulse.t
        h = pulse.dt
        v = pulse.values
        d1 = np.gradient(v, h, edge_order=2)
        d2 = np.gradient(d1, h, edge_order=2)
        self._splines = [CubicSpline(self.t, arr) for arr in (v, d1, d2)]

    def value(self, t):
        return self._splines[0](t)

    def d1(self, t):
        return self._splines[1](t)

    def d2(self, t):
        return self._splines[2](t)


def as_target(pulse) -> TargetPulse:
    if isinstance(pulse, TargetPulse):
        return pulse
    if isinstance(pulse, PulseSpec):
        return SampledPulse(pulse)
    raise TypeError(f"expected PulseSpec or TargetPulse, got {type(pulse).__name__}")
