"""Classical fixed-step fourth-order Runge-Kutta for complex vector ODEs."""

from __future__ import annotations

import numpy as np


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + (h / 2) * k1)
    k3 = f(t + h / 2, y + (h / 2) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def check_uniform(t, rtol=1e-9) -> float:
    """Return the spacing of ``t``; raise if the grid is not uniform."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("time grid needs at least two samples")
    dts = np.diff(t)
    h = (t[-1] - t[0]) / (t.size - 1)
    if not h > 0 or np.max(np.abs(dts - h)) > rtol * max(abs(h), abs(t[-1]), abs(t[0])):
        raise ValueError("time grid must be uniform and increasing")
    return float(h)


def rk4(f, y0, t):
    """Integrate ``y' = f(t, y)`` over the uniform grid ``t``; returns all samples."""
    h = check_uniform(t)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(t),) + y.shape, dtype=complex)
    out[0] = y
    times = np.asarray(t, dtype=float).tolist()
    for i in range(len(times) - 1):
        y = rk4_step(f, times[i], y, h)
        out[i + 1] = y
    return out


class HalfStepSampler:
    """Samples on the half-step grid t0 + j h/2, looked up at RK4 stage times."""

    def __init__(self, values, t0: float, h: float):
        self.values = np.asarray(values)
        self.t0 = float(t0)
        self.h = float(h)
        self._scale = 2.0 / self.h
        self._items = self.values.tolist()

    @classmethod
    def from_grid(cls, t, values):
        """Fill half-steps by cubic-spline interpolation of grid samples."""
        from scipy.interpolate import CubicSpline

        t = np.asarray(t, dtype=float)
        h = check_uniform(t)
        values = np.asarray(values)
        half = np.empty(2 * len(t) - 1, dtype=values.dtype)
        half[0::2] = values
        if len(t) >= 3:
            half[1::2] = CubicSpline(t, values)(t[:-1] + h / 2)
        else:
            half[1::2] = 0.5 * (values[:-1] + values[1:])
        return cls(half, float(t[0]), h)

    @classmethod
    def from_function(cls, fn, t):
        t = np.asarray(t, dtype=float)
        h = check_uniform(t)
        th = t[0] + 0.5 * h * np.arange(2 * len(t) - 1)
        return cls(np.asarray(fn(th)), float(t[0]), h)

    def reversed(self, t_total: float) -> "HalfStepSampler":
        """Sampler for s(t) -> self(t_total - t) over the same grid span."""
        span = self.h / 2 * (len(self.values) - 1)
        if abs(self.t0 + span - (t_total - self.t0)) > 1e-9 * max(1.0, abs(t_total)):
            raise ValueError("reversal point must be the grid midpoint")
        return HalfStepSampler(self.values[::-1].copy(), self.t0, self.h)

    def __call__(self, t):
        return self._items[int((t - self.t0) * self._scale + 0.5)]
