"""Whispering-gallery resonator volumes and the radius / Q design trade-off.

The fundamental (radial order 1, m = ell) mode of a dielectric sphere is
described by the usual large-ell asymptotic volume

    V = 3.4 pi^(3/2) (lambda / (2 pi n))^3 ell^(11/6) sqrt(ell - m + 1),

with ell = round(2 pi R n / lambda). TE/TM polarisation corrections are
neglected, and rounding ell makes V a step function of R on the
sub-wavelength scale.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Literal

from . import coupling

WGM_PREFACTOR = 3.4
MODEL_NOTES = {
    "mode_volume_model": "3.4*pi^1.5*(lambda/(2*pi*n))^3*ell^(11/6), m = ell",
    "polarisation": "TE/TM correction factors neglected",
    "ell_rounding": "ell = round(2*pi*R*n/lambda)",
}
CURVE_HEADER = ("radius_m", "Q_required", "ell", "mode_volume_m3")

Target = Literal["N0_pop", "N0_ph"]


class BelowCutoffError(ValueError):
    pass


def azimuthal_order(radius: float, n: float, wavelength_vac: float) -> int:
    return int(round(2 * math.pi * radius * n / wavelength_vac))


def fundamental_mode_volume(radius: float, n: float, wavelength_vac: float) -> float:
    """Volume (m^3) of the fundamental WGM of a sphere of the given radius."""
    if not (radius > 0 and wavelength_vac > 0 and n >= 1):
        raise ValueError("need radius > 0, wavelength > 0 and n >= 1")
    ell = azimuthal_order(radius, n, wavelength_vac)
    if ell < 1:
        raise BelowCutoffError(
            f"resonator below fundamental-mode cutoff (ell={ell} for R={radius:g} m)"
        )
    return (
        WGM_PREFACTOR
        * math.pi**1.5
        * (wavelength_vac / (2 * math.pi * n)) ** 3
        * ell ** (11 / 6)
    )


@dataclass(frozen=True)
class ResonatorSpec:
    radius: float
    n: float
    wavelength_vac: float
    Q: float
    mode_volume_override: float | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        if not self.Q > 0:
            raise ValueError(f"Q must be positive, got {self.Q!r}")
        if not self.n >= 1:
            raise ValueError(f"refractive index must be >= 1, got {self.n!r}")

    @classmethod
    def for_transition(cls, transition, radius: float, Q: float, mode_volume=None):
        return cls(radius, transition.host_index, transition.wavelength_vac, Q, mode_volume)

    @property
    def ell(self) -> int:
        return azimuthal_order(self.radius, self.n, self.wavelength_vac)

    def mode_volume(self) -> float:
        if self.mode_volume_override is not None:
            return self.mode_volume_override
        return fundamental_mode_volume(self.radius, self.n, self.wavelength_vac)

    def resolved(self) -> "ResonatorSpec":
        return replace(self, mode_volume_override=self.mode_volume())


def figures_for(transition, resonator: ResonatorSpec) -> coupling.CavityFigures:
    return coupling.figures(transition, resonator.resolved())


def _target_time(transition, target: Target) -> float:
    if target == "N0_pop":
        return transition.T1
    if target == "N0_ph":
        return transition.T2 / 2
    raise ValueError(f"target must be 'N0_pop' or 'N0_ph', got {target!r}")


@dataclass(frozen=True)
class CurvePoint:
    radius: float
    Q_required: float
    ell: int
    mode_volume: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def required_Q(transition, target: Target, mode_volume: float) -> float:
    """Quality factor at which the chosen critical atom number equals one."""
    n, lam = transition.host_index, transition.wavelength_vac
    beta = coupling.beta_parameter(mode_volume, n, lam)
    T_spon = coupling.spontaneous_time(transition)
    return beta * (T_spon / _target_time(transition, target)) * coupling.local_field_factor(n)


def radius_q_curve(transition, target: Target, radii) -> list[CurvePoint]:
    """Required Q along a radius grid; invalid radii carry an error marker."""
    _target_time(transition, target)
    n, lam = transition.host_index, transition.wavelength_vac
    points = []
    for R in radii:
        R = float(R)
        try:
            V = fundamental_mode_volume(R, n, lam)
        except ValueError as exc:
            ell = azimuthal_order(R, n, lam) if R > 0 else 0
            points.append(CurvePoint(R, math.nan, ell, math.nan, str(exc)))
            continue
        points.append(CurvePoint(R, required_Q(transition, target, V), azimuthal_order(R, n, lam), V))
    return points


def curve_to_csv(points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for p in points:
        writer.writerow([repr(p.radius), repr(p.Q_required), p.ell, repr(p.mode_volume)])
    return buf.getvalue()
