"""Ten-digit typed entity identifiers.

Every entity id renders as exactly 10 decimal digits: one family-prefix
digit followed by a nine-digit zero-padded counter.  Affiliation ids
additionally encode the university hierarchy in their digit pattern.
"""

from __future__ import annotations

from enum import Enum

from .errors import CounterOverflow, MalformedAffiliationId, ValidationError

MAX_COUNTER = 999_999_999


class Family(str, Enum):
    """Entity families, keyed by their fixed prefix digit."""

    LOCATION = "location"        # 0: buildings and locations
    AFFILIATION = "affiliation"  # 1
    USER = "user"                # 2: users, titles, request types
    ROLE = "role"                # 3: user roles, log actors
    ITEM = "item"                # 4
    CATEGORY = "category"        # 5: categories, property defs, groups
    ITEM_PROPERTY = "item_property"  # 6


_PREFIX = {
    Family.LOCATION: 0,
    Family.AFFILIATION: 1,
    Family.USER: 2,
    Family.ROLE: 3,
    Family.ITEM: 4,
    Family.CATEGORY: 5,
    Family.ITEM_PROPERTY: 6,
}
_FAMILY_BY_PREFIX = {v: k for k, v in _PREFIX.items()}


def prefix_of(family: Family) -> int:
    return _PREFIX[family]


def encode_id(family: Family, counter: int) -> str:
    """Render the 10-digit id for ``counter`` within ``family``."""
    if not isinstance(family, Family):
        raise ValidationError(f"unknown entity family: {family!r}")
    if counter < 0 or counter > MAX_COUNTER:
        raise CounterOverflow(f"counter {counter} outside [0, {MAX_COUNTER}]")
    return f"{_PREFIX[family]}{counter:09d}"


def decode_id(value: str) -> tuple[Family, int]:
    """Inverse of :func:`encode_id`; validates shape and prefix."""
    if len(value) != 10 or not value.isdigit():
        raise ValidationError(f"not a 10-digit id: {value!r}")
    family = _FAMILY_BY_PREFIX.get(int(value[0]))
    if family is None:
        raise ValidationError(f"unknown id prefix: {value[0]}")
    return family, int(value[1:])


def is_valid_id(value: str, family: Family | None = None) -> bool:
    try:
        got, _ = decode_id(value)
    except ValidationError:
        return False
    return family is None or got is family


# --- Affiliation digit grammar (university / faculty / department) ---

UNIVERSITY_ID = "1000000000"


class AffiliationTier(str, Enum):
    UNIVERSITY = "University"
    FACULTY = "Faculty"
    DEPARTMENT = "Department"


def affiliation_tier(affln_id: str) -> AffiliationTier:
    """Classify an affiliation id by its counter digit pattern.

    University: nine zeros.  Faculty: two nonzero digits then seven
    zeros.  Department: the faculty's two digits then a nonzero
    seven-digit tail ("nonzero" read as not-all-zero).
    """
    if len(affln_id) != 10 or not affln_id.isdigit() or affln_id[0] != "1":
        raise MalformedAffiliationId(f"not an affiliation id: {affln_id!r}")
    counter = affln_id[1:]
    fac, tail = counter[:2], counter[2:]
    if counter == "000000000":
        return AffiliationTier.UNIVERSITY
    if fac != "00":
        # "non-zero" digit runs are read as not-all-zero, so 99 faculty
        # codes (01..99) and 9,999,999 department tails exist.
        if tail == "0000000":
            return AffiliationTier.FACULTY
        return AffiliationTier.DEPARTMENT
    raise MalformedAffiliationId(f"digit pattern matches no tier: {affln_id}")


def affiliation_parent(affln_id: str) -> str:
    """University -> itself; faculty -> university; department -> faculty."""
    tier = affiliation_tier(affln_id)
    if tier is AffiliationTier.UNIVERSITY:
        return affln_id
    if tier is AffiliationTier.FACULTY:
        return UNIVERSITY_ID
    return "1" + affln_id[1:3] + "0000000"


def faculty_id(digits: str) -> str:
    """Affiliation id for a two-digit faculty code ("00" is reserved)."""
    if len(digits) != 2 or digits == "00" or not digits.isdigit():
        raise MalformedAffiliationId(f"invalid faculty digits: {digits!r}")
    return f"1{digits}0000000"


def department_id(faculty: str, tail: int) -> str:
    """Department id under ``faculty`` with the given nonzero tail."""
    if affiliation_tier(faculty) is not AffiliationTier.FACULTY:
        raise MalformedAffiliationId(f"not a faculty id: {faculty!r}")
    if not 1 <= tail <= 9_999_999:
        raise CounterOverflow(f"department tail {tail} outside [1, 9999999]")
    return faculty[:3] + f"{tail:07d}"


def affiliation_ancestors(affln_id: str) -> list[str]:
    """Chain from ``affln_id`` up to the university, inclusive."""
    chain = [affln_id]
    while chain[-1] != UNIVERSITY_ID:
        chain.append(affiliation_parent(chain[-1]))
    return chain
