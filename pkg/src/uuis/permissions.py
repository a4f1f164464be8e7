"""16-bit permission masks and the 0-3 approval-level ordering."""

from __future__ import annotations

from enum import IntEnum
from functools import reduce
from operator import or_

from .errors import UnknownPermission, ValidationError

MASK_BITS = 16
FULL_MASK = (1 << MASK_BITS) - 1


class Permission(IntEnum):
    """Named grants; each occupies one bit of the 16-bit mask."""

    VIEW_OWN = 0
    SUBMIT_REQUEST = 1
    VIEW_DEPT_ASSETS = 2
    MANAGE_ASSETS = 3
    APPROVE_L1 = 4
    APPROVE_L2 = 5
    APPROVE_L3 = 6
    MANAGE_USERS = 7
    CREATE_DEPARTMENT = 8
    CREATE_FACULTY = 9
    ADD_LOCATION = 10
    BACKUP = 11
    AUDIT = 12
    ERROR_MGMT = 13
    REPORT = 14
    BULK_IMPORT = 15

    @property
    def bit(self) -> int:
        return 1 << self.value


def mask_of(*perms: Permission) -> int:
    return reduce(or_, (p.bit for p in perms), 0)


def validate_mask(mask: int) -> int:
    if not 0 <= mask <= FULL_MASK:
        raise ValidationError(f"mask {mask} outside 16-bit range")
    return mask


def mask_grants(mask: int, perm: Permission | int | str) -> bool:
    """True iff the named permission bit is set in ``mask``."""
    validate_mask(mask)
    if isinstance(perm, str):
        try:
            perm = Permission[perm]
        except KeyError:
            raise UnknownPermission(perm) from None
    elif not isinstance(perm, Permission):
        try:
            perm = Permission(perm)
        except ValueError:
            raise UnknownPermission(str(perm)) from None
    return bool(mask & perm.bit)


def combine_masks(masks) -> int:
    """Bitwise-OR fold; the effective mask of a set of role grants."""
    return reduce(or_, (validate_mask(m) for m in masks), 0)


# Canonical default mask per approval level.
LEVEL_0_MASK = mask_of(Permission.VIEW_OWN, Permission.SUBMIT_REQUEST)
LEVEL_1_MASK = LEVEL_0_MASK | mask_of(
    Permission.VIEW_DEPT_ASSETS, Permission.MANAGE_ASSETS, Permission.APPROVE_L1,
    Permission.BACKUP, Permission.AUDIT, Permission.BULK_IMPORT,
)
LEVEL_2_MASK = LEVEL_1_MASK | mask_of(
    Permission.APPROVE_L2, Permission.MANAGE_USERS, Permission.CREATE_DEPARTMENT,
    Permission.ADD_LOCATION, Permission.ERROR_MGMT, Permission.REPORT,
)
LEVEL_3_MASK = FULL_MASK

LEVEL_MASKS = {0: LEVEL_0_MASK, 1: LEVEL_1_MASK, 2: LEVEL_2_MASK, 3: LEVEL_3_MASK}

_APPROVE_BITS = (
    (3, Permission.APPROVE_L3),
    (2, Permission.APPROVE_L2),
    (1, Permission.APPROVE_L1),
)


def level_of(mask: int) -> int:
    """Approval level: the highest ApproveLn bit granted, else 0."""
    validate_mask(mask)
    for level, perm in _APPROVE_BITS:
        if mask & perm.bit:
            return level
    return 0


def approve_permission(level: int) -> Permission:
    """The ApproveLn bit demanded by a level-n request type."""
    for lvl, perm in _APPROVE_BITS:
        if lvl == level:
            return perm
    raise ValidationError(f"no approval permission for level {level}")
