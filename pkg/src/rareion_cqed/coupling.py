"""Cavity-QED figures of merit for a rare-earth dopant in a dielectric resonator.

All rates are angular (rad/s). Wavelengths are vacuum wavelengths; the host
index enters only through the explicit ``n`` factors of each expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import c, e, epsilon_0, hbar, m_e, pi

# relative agreement demanded between the beta-form and rate-form critical numbers
IDENTITY_RTOL = 1e-9


class MissingModeVolumeError(ValueError):
    pass


def local_field_factor(n: float) -> float:
    """Lorentz local-field correction ((n^2 + 2) / 3)^2."""
    return ((n * n + 2.0) / 3.0) ** 2


def transition_angular_frequency(wavelength: float) -> float:
    return 2 * pi * c / wavelength


def dipole_moment(transition) -> float:
    """Transition dipole moment (C m) from the oscillator strength."""
    n = transition.host_index
    omega = transition_angular_frequency(transition.wavelength_vac)
    mu2 = 3 * hbar * e**2 * n * transition.oscillator_strength / (
        2 * m_e * omega * local_field_factor(n)
    )
    return math.sqrt(mu2)


def spontaneous_time_from_mu(mu: float, wavelength: float, n: float) -> float:
    return 3 * epsilon_0 * hbar * wavelength**3 / (8 * pi**2 * n * local_field_factor(n) * mu**2)


def spontaneous_time(transition) -> float:
    """Two-level radiative lifetime (s) implied by the oscillator strength alone."""
    return spontaneous_time_from_mu(
        dipole_moment(transition), transition.wavelength_vac, transition.host_index
    )


def cavity_kappa(wavelength: float, Q: float) -> float:
    """Cavity field decay rate pi c / (lambda Q)."""
    if not Q > 0:
        raise ValueError(f"Q must be positive, got {Q!r}")
    return pi * c / (wavelength * Q)


def coupling_g_from_mu(mu: float, n: float, wavelength: float, mode_volume: float) -> float:
    if not mode_volume > 0:
        raise ValueError(f"mode volume must be positive, got {mode_volume!r}")
    omega_a = transition_angular_frequency(wavelength)
    return (mu / n) * math.sqrt(omega_a / (2 * hbar * epsilon_0 * mode_volume))


def coupling_g(transition, mode_volume: float) -> float:
    """Single-photon coupling g (rad/s) for an ion at the field maximum."""
    return coupling_g_from_mu(
        dipole_moment(transition), transition.host_index, transition.wavelength_vac, mode_volume
    )


def beta_parameter(mode_volume: float, n: float, wavelength: float) -> float:
    """Mode volume in units of 3 lambda^3 / (8 pi^2 n^3)."""
    if not (mode_volume > 0 and n > 0 and wavelength > 0):
        raise ValueError("mode_volume, n and wavelength must all be positive")
    return 8 * pi**2 * n**3 * mode_volume / (3 * wavelength**3)


@dataclass(frozen=True)
class RatesInput:
    g: float
    kappa: float
    gamma: float
    gamma_p: float = 0.0

    def __post_init__(self):
        for name in ("g", "kappa", "gamma", "gamma_p"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")

    @property
    def gamma_h(self) -> float:
        return self.gamma / 2 + self.gamma_p

    def _need_g(self):
        if not self.g > 0:
            raise ValueError("coupling figures need g > 0")

    @property
    def N0_pop(self) -> float:
        self._need_g()
        return self.gamma * self.kappa / self.g**2

    @property
    def N0_ph(self) -> float:
        self._need_g()
        return 2 * self.gamma_h * self.kappa / self.g**2

    @property
    def n0(self) -> float:
        self._need_g()
        return self.gamma * self.gamma_h / (4 * self.g**2)

    @property
    def cooperativity(self) -> float:
        """2 g^2 / (kappa gamma), the inverse of N0_pop up to a factor of two."""
        return 2 * self.g**2 / (self.kappa * self.gamma)


@dataclass(frozen=True)
class CavityFigures:
    mu: float
    T_spon: float
    chi_L: float
    beta: float
    g: float
    kappa: float
    gamma: float
    gamma_h: float
    N0_pop: float
    N0_ph: float
    n0: float

    @property
    def rates(self) -> RatesInput:
        return RatesInput(self.g, self.kappa, self.gamma, self.gamma_h - self.gamma / 2)


def critical_numbers_beta_form(beta, Q, T_spon, T1, T2, chi_L, wavelength):
    """(N0_pop, N0_ph, n0) written through the mode-volume parameter beta."""
    N0_pop = beta / Q * (T_spon / T1) * chi_L
    N0_ph = 2 * beta / Q * (T_spon / T2) * chi_L
    n0 = wavelength * beta / (4 * pi * c) * T_spon / (T1 * T2) * chi_L
    return N0_pop, N0_ph, n0


def _agree(a: float, b: float) -> bool:
    return abs(a - b) <= IDENTITY_RTOL * max(abs(a), abs(b))


def figures(transition, resonator) -> CavityFigures:
    """Full figure-of-merit bundle for ``transition`` in ``resonator``.

    ``resonator`` must expose ``Q`` and an explicit ``mode_volume_override``;
    for whispering-gallery geometry use :func:`rareion_cqed.wgm_design.figures_for`,
    which fills the mode volume in from the radius.
    """
    V = getattr(resonator, "mode_volume_override", None)
    if V is None:
        raise MissingModeVolumeError(
            "resonator has no mode volume; call rareion_cqed.wgm_design.figures_for() "
            "or set mode_volume_override"
        )
    lam, n, Q = transition.wavelength_vac, transition.host_index, resonator.Q
    mu = dipole_moment(transition)
    T_spon = spontaneous_time_from_mu(mu, lam, n)
    chi_L = local_field_factor(n)
    beta = beta_parameter(V, n, lam)
    g = coupling_g_from_mu(mu, n, lam, V)
    kappa = cavity_kappa(lam, Q)
    rates = RatesInput(
        g=g,
        kappa=kappa,
        gamma=1 / transition.T1,
        gamma_p=1 / transition.T2 - 1 / (2 * transition.T1),
    )

    closed = critical_numbers_beta_form(beta, Q, T_spon, transition.T1, transition.T2, chi_L, lam)
    # gamma_h is 1/T2 by definition; the difference form above only carries rounding
    rate_form = (
        rates.N0_pop,
        2 * kappa / (transition.T2 * g**2),
        1 / (transition.T1 * transition.T2 * 4 * g**2),
    )
    for name, a, b in zip(("N0_pop", "N0_ph", "n0"), closed, rate_form):
        if not _agree(a, b):
            raise ArithmeticError(f"{name}: beta-form {a!r} disagrees with rate-form {b!r}")

    return CavityFigures(
        mu=mu,
        T_spon=T_spon,
        chi_L=chi_L,
        beta=beta,
        g=g,
        kappa=kappa,
        gamma=rates.gamma,
        gamma_h=1 / transition.T2,
        N0_pop=closed[0],
        N0_ph=closed[1],
        n0=closed[2],
    )
