"""Spectroscopic parameters of rare-earth optical transitions.

The catalog is a plain-text file of ``key = value`` blocks separated by blank
lines; ``#`` starts a comment. Wavelengths are stored in nm and lifetimes in
microseconds, and are converted to SI on load.
"""

from __future__ import annotations

import math
import os
from decimal import Decimal, InvalidOperation
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

CATALOG_ENV_VAR = "RAREION_CQED_CATALOG"

_FIELDS = (
    "id",
    "wavelength_nm",
    "oscillator_strength",
    "T1_us",
    "T2_us",
    "T2_field",
    "host_index",
)
_NUMERIC = {"wavelength_nm", "oscillator_strength", "T1_us", "T2_us", "host_index"}
# decimal exponent taking each stored unit to SI
_SCALE = {"wavelength_nm": -9, "T1_us": -6, "T2_us": -6}


class CatalogError(ValueError):
    """Malformed catalog file or a record that violates a physical constraint."""


@dataclass(frozen=True)
class IonTransition:
    """One rare-earth transition in its host crystal (SI units)."""

    id: str
    wavelength_vac: float  # m
    oscillator_strength: float
    T1: float  # s
    T2: float  # s
    T2_field_note: str
    host_index: float

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise CatalogError(f"record {self.id!r}: " + "; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        for name in ("wavelength_vac", "oscillator_strength", "T1", "T2"):
            if not (getattr(self, name) > 0 and math.isfinite(getattr(self, name))):
                out.append(f"{name} > 0 violated ({getattr(self, name)!r})")
        if self.T2 > 2 * self.T1:
            out.append(f"T2 ≤ 2·T1 violated (T2={self.T2:g} s, T1={self.T1:g} s)")
        if not (self.host_index >= 1 and math.isfinite(self.host_index)):
            out.append(f"host_index ≥ 1 violated ({self.host_index!r})")
        return out

    @property
    def angular_frequency(self) -> float:
        from scipy.constants import c, pi

        return 2 * pi * c / self.wavelength_vac


def default_catalog_path() -> Path:
    override = os.environ.get(CATALOG_ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("rareion_cqed") / "data" / "rare_earth_transitions.cat"))


def _record_from_fields(fields: dict[str, tuple[str, int]], path) -> IonTransition:
    first_line = min(line for _, line in fields.values())
    missing = [k for k in _FIELDS if k not in fields]
    if missing:
        raise CatalogError(f"{path}:{first_line}: record missing field(s) {', '.join(missing)}")
    values = {}
    for key in _NUMERIC:
        raw, line = fields[key]
        try:
            # exact decimal shift, then one correctly rounded conversion
            values[key] = float(Decimal(raw).scaleb(_SCALE.get(key, 0)))
        except InvalidOperation:
            raise CatalogError(f"{path}:{line}: field {key!r} is not a number: {raw!r}") from None
    return IonTransition(
        id=fields["id"][0],
        wavelength_vac=values["wavelength_nm"],
        oscillator_strength=values["oscillator_strength"],
        T1=values["T1_us"],
        T2=values["T2_us"],
        T2_field_note=fields["T2_field"][0],
        host_index=values["host_index"],
    )


def parse_catalog(text: str, source: str = "<string>") -> list[IonTransition]:
    blocks: list[dict[str, tuple[str, int]]] = []
    current: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            # comment-only lines do not terminate a block
            if not raw.strip() and current:
                blocks.append(current)
                current = {}
            continue
        if "=" not in line:
            raise CatalogError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise CatalogError(f"{source}:{lineno}: unknown field {key!r}")
        if key in current:
            raise CatalogError(f"{source}:{lineno}: field {key!r} repeated within one record")
        current[key] = (value, lineno)
    if current:
        blocks.append(current)

    records = []
    seen: dict[str, int] = {}
    for block in blocks:
        rec = _record_from_fields(block, source)
        line = block["id"][1]
        if rec.id in seen:
            raise CatalogError(f"{source}:{line}: duplicate id {rec.id!r} (first at line {seen[rec.id]})")
        seen[rec.id] = line
        records.append(rec)
    return records


def load_catalog(path=None) -> list[IonTransition]:
    """Read and validate a catalog file; ``None`` loads the bundled table."""
    path = Path(path) if path is not None else default_catalog_path()
    return parse_catalog(path.read_text(encoding="utf-8"), source=str(path))


def _in_units(value_si: float, key: str) -> str:
    """Decimal in catalog units that re-parses to exactly ``value_si``."""
    d = Decimal(repr(value_si)).scaleb(-_SCALE[key])
    return f"{d:f}" if -7 < d.adjusted() < 16 else str(d)


def serialize_catalog(records) -> str:
    chunks = []
    for r in records:
        chunks.append(
            "\n".join(
                [
                    f"id = {r.id}",
                    f"wavelength_nm = {_in_units(r.wavelength_vac, 'wavelength_nm')}",
                    f"oscillator_strength = {r.oscillator_strength!r}",
                    f"T1_us = {_in_units(r.T1, 'T1_us')}",
                    f"T2_us = {_in_units(r.T2, 'T2_us')}",
                    f"T2_field = {r.T2_field_note}",
                    f"host_index = {r.host_index!r}",
                ]
            )
        )
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def get_transition(catalog, id: str) -> IonTransition:
    for rec in catalog:
        if rec.id == id:
            return rec
    available = ", ".join(repr(r.id) for r in catalog) or "(catalog is empty)"
    raise KeyError(f"unknown transition {id!r}; available: {available}")
