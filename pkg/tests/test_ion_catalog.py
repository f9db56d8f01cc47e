import math

import pytest
from hypothesis import given, settings, strategies as st

from rareion_cqed import ion_catalog
from rareion_cqed.ion_catalog import CatalogError, IonTransition

EXPECTED_IDS = [
    "Pr3+:Y2SiO5 3H4-1D2",
    "Pr3+:YAG 3H4-1D2",
    "Nd3+:YVO4 4I9/2-4F3/2",
    "Er3+:Y2SiO5 4I15/2-4I13/2",
    "Er3+:LiNbO3 4I15/2-4I13/2",
    "Tm3+:LiNbO3 3H6-3H4",
    "Tm3+:YAG 3H6-3H4",
    "Eu3+:Y2SiO5 7F0-5D0",
]

GOOD_BLOCK = """\
id = X:host a-b
wavelength_nm = 600
oscillator_strength = 1e-7
T1_us = 100
T2_us = 50
T2_field = zero field
host_index = 1.8
"""


def test_bundled_catalog_ids_in_order():
    assert [r.id for r in ion_catalog.load_catalog()] == EXPECTED_IDS


def test_bundled_records_obey_constraints():
    for r in ion_catalog.load_catalog():
        assert r.violations() == []
        assert r.T2 <= 2 * r.T1
        assert 1.7 <= r.host_index <= 2.3


def test_units_are_si():
    pr = ion_catalog.get_transition(ion_catalog.load_catalog(), "Pr3+:Y2SiO5 3H4-1D2")
    assert pr.wavelength_vac == pytest.approx(605.977e-9, rel=1e-6)
    assert pr.T1 == pytest.approx(164e-6)
    assert pr.angular_frequency == pytest.approx(2 * math.pi * 299792458 / pr.wavelength_vac)


def test_t2_longer_than_twice_t1_rejected():
    with pytest.raises(CatalogError, match="T2 ≤ 2·T1"):
        IonTransition("bad", 600e-9, 1e-7, 1e-6, 3e-6, "", 1.8)


def test_missing_field_reports_line():
    text = GOOD_BLOCK.replace("host_index = 1.8\n", "")
    with pytest.raises(CatalogError, match=r"<string>:1: .*host_index"):
        ion_catalog.parse_catalog(text)


@pytest.mark.parametrize(
    "mutation, pattern",
    [
        (lambda s: s + "colour = red\n", "unknown field"),
        (lambda s: s.replace("T1_us = 100", "T1_us = lots"), "not a number"),
        (lambda s: s + "T1_us = 5\n", "repeated"),
        (lambda s: s + "\n" + s, "duplicate id"),
        (lambda s: s + "just words\n", "key = value"),
    ],
)
def test_malformed_text(mutation, pattern):
    with pytest.raises(CatalogError, match=pattern):
        ion_catalog.parse_catalog(mutation(GOOD_BLOCK))


def test_comment_line_inside_block_is_ignored():
    text = GOOD_BLOCK.replace("T1_us = 100\n", "T1_us = 100\n# note\n")
    (rec,) = ion_catalog.parse_catalog(text)
    assert rec.T2 == pytest.approx(50e-6)


def test_unknown_id_lists_available():
    with pytest.raises(KeyError, match="Eu3"):
        ion_catalog.get_transition(ion_catalog.load_catalog(), "nope")


def test_env_var_overrides_default(tmp_path, monkeypatch):
    path = tmp_path / "mine.cat"
    path.write_text(GOOD_BLOCK)
    monkeypatch.setenv(ion_catalog.CATALOG_ENV_VAR, str(path))
    assert [r.id for r in ion_catalog.load_catalog()] == ["X:host a-b"]


def test_bundled_roundtrip_exact():
    recs = ion_catalog.load_catalog()
    assert ion_catalog.parse_catalog(ion_catalog.serialize_catalog(recs)) == recs


_pos = st.floats(min_value=1e-3, max_value=1e4, allow_nan=False)


@st.composite
def transitions(draw):
    T1 = draw(_pos) * 1e-6
    T2 = draw(st.floats(min_value=1e-3, max_value=2.0)) * T1
    return IonTransition(
        id=draw(st.text("ABCxyz+:-/ 0123", min_size=1, max_size=12).map(str.strip).filter(bool)),
        wavelength_vac=draw(st.floats(min_value=200, max_value=3000)) * 1e-9,
        oscillator_strength=draw(st.floats(min_value=1e-12, max_value=1e-3)),
        T1=T1,
        T2=T2,
        T2_field_note=draw(st.sampled_from(["zero field", "0.1 T", "optimal field"])),
        host_index=draw(st.floats(min_value=1.0, max_value=3.5)),
    )


@given(st.lists(transitions(), min_size=1, max_size=4, unique_by=lambda r: r.id))
@settings(max_examples=60, deadline=None)
def test_serialize_parse_roundtrip(records):
    assert ion_catalog.parse_catalog(ion_catalog.serialize_catalog(records)) == records


def test_non_finite_values_rejected():
    with pytest.raises(CatalogError, match="T1 > 0"):
        ion_catalog.parse_catalog(GOOD_BLOCK.replace("T1_us = 100", "T1_us = inf"))


def test_empty_text_gives_empty_catalog(tmp_path):
    path = tmp_path / "empty.cat"
    path.write_text("")
    assert ion_catalog.load_catalog(path) == []


def test_lookup_values():
    cat = ion_catalog.load_catalog()
    er = ion_catalog.get_transition(cat, "Er3+:Y2SiO5 4I15/2-4I13/2")
    assert (er.wavelength_vac, er.oscillator_strength, er.T1, er.T2) == pytest.approx((1536.14e-9, 2e-7, 11400e-6, 4080e-6))
    pr = ion_catalog.get_transition(cat, "Pr3+:Y2SiO5 3H4-1D2")
    assert (pr.wavelength_vac, pr.oscillator_strength) == pytest.approx((605.977e-9, 3e-7))
