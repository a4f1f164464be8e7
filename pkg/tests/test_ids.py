import pytest
from hypothesis import given, strategies as st

from uuis import errors
from uuis.ids import (
    Family,
    UNIVERSITY_ID,
    AffiliationTier,
    affiliation_ancestors,
    affiliation_parent,
    affiliation_tier,
    decode_id,
    department_id,
    encode_id,
    faculty_id,
)


def test_encode_zero_padding():
    assert encode_id(Family.ITEM, 17) == "4000000017"


def test_encode_university_root():
    # nine zeros denote the university itself
    assert encode_id(Family.AFFILIATION, 0) == UNIVERSITY_ID


def test_encode_overflow():
    with pytest.raises(errors.CounterOverflow):
        encode_id(Family.ITEM, 1_000_000_000)
    with pytest.raises(errors.CounterOverflow):
        encode_id(Family.ITEM, -1)


@given(st.integers(min_value=0, max_value=999_999_999),
       st.sampled_from(list(Family)))
def test_encode_decode_roundtrip(counter, family):
    rendered = encode_id(family, counter)
    assert len(rendered) == 10 and rendered.isdigit()
    assert decode_id(rendered) == (family, counter)


def test_affiliation_parent_examples():
    assert affiliation_parent("1120000000") == UNIVERSITY_ID
    assert affiliation_parent("1124567891") == "1120000000"
    assert affiliation_parent(UNIVERSITY_ID) == UNIVERSITY_ID


def _tier_oracle(counter: str):
    """Brute-force tier classification over the digit grammar."""
    if counter == "000000000":
        return AffiliationTier.UNIVERSITY
    if counter[:2] == "00":
        return None
    if counter[2:] == "0000000":
        return AffiliationTier.FACULTY
    return AffiliationTier.DEPARTMENT


@given(st.text(alphabet="0123456789", min_size=9, max_size=9))
def test_tier_matches_oracle(counter):
    affln = "1" + counter
    expected = _tier_oracle(counter)
    if expected is None:
        with pytest.raises(errors.MalformedAffiliationId):
            affiliation_tier(affln)
    else:
        assert affiliation_tier(affln) is expected


@given(st.text(alphabet="0123456789", min_size=9, max_size=9))
def test_parent_idempotent_after_two_applications(counter):
    affln = "1" + counter
    if _tier_oracle(counter) is None:
        return
    twice = affiliation_parent(affiliation_parent(affln))
    assert affiliation_parent(twice) == UNIVERSITY_ID == affiliation_parent(UNIVERSITY_ID)


def test_department_id_construction():
    fac = faculty_id("12")
    assert fac == "1120000000"
    assert department_id(fac, 4567891) == "1124567891"
    with pytest.raises(errors.CounterOverflow):
        department_id(fac, 0)


def test_ancestors_chain():
    assert affiliation_ancestors("1124567891") == [
        "1124567891", "1120000000", UNIVERSITY_ID]


def test_malformed_rejected():
    with pytest.raises(errors.MalformedAffiliationId):
        affiliation_tier("4000000001")
    with pytest.raises(errors.MalformedAffiliationId):
        affiliation_parent("1004567891")
