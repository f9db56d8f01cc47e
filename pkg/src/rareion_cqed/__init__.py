"""Cavity QED figures of merit, photon transfer and linear response for rare-earth dopants in optical resonators."""

__version__ = "0.1.0"
