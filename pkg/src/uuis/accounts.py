"""Mask, level, and visibility-scope helpers over stored accounts."""

from __future__ import annotations

from typing import Iterable, Optional

from .ids import affiliation_ancestors, decode_id, Family
from .models import AclEntry, Item, User, UserRole
from .permissions import Permission, combine_masks, level_of, mask_grants


def effective_mask(roles: Iterable[tuple[UserRole, AclEntry]]) -> int:
    """OR-fold of the ACL masks of the accepted roles."""
    return combine_masks(acl.mask for role, acl in roles if role.status == "Accepted")


def roles_of(view, user_id: str) -> list[tuple[UserRole, AclEntry]]:
    pairs = []
    for role in view.find("role", lambda r: r.user_id == user_id):
        acl = view.get("acl", role.user_role_id)
        if acl is not None:
            pairs.append((role, acl))
    return pairs


def user_effective_mask(view, user_id: str) -> int:
    return effective_mask(roles_of(view, user_id))


def user_level(view, user_id: str) -> int:
    return level_of(user_effective_mask(view, user_id))


def find_user_by_code(view, user_code: str) -> Optional[User]:
    matches = view.find("user", lambda u: u.user_code == user_code)
    return matches[0] if matches else None


def scope_afflns(view, user_id: str) -> set[str]:
    """Affiliation subtrees the user belongs to through accepted roles.

    Includes each role affiliation plus all its descendants' prefixes via
    the ancestor test at query time (see :func:`affln_in_scope`).
    """
    return {
        role.affln_id
        for role, _ in roles_of(view, user_id)
        if role.status == "Accepted"
    }


def affln_in_scope(affln_id: str, scope: set[str]) -> bool:
    """True iff ``affln_id`` lies in the subtree of any scope root."""
    try:
        chain = set(affiliation_ancestors(affln_id))
    except Exception:
        return False
    return bool(chain & scope)


def item_affiliation(view, item: Item) -> Optional[str]:
    """The affiliation an item belongs to, through its owner."""
    family, _ = decode_id(item.owner_id)
    if family is Family.AFFILIATION:
        return item.owner_id
    if family is Family.USER:
        pairs = roles_of(view, item.owner_id)
        for role, _ in pairs:
            if role.status == "Accepted":
                return role.affln_id
    return None


def item_visible(view, item: Item, user_id: str, mask: int,
                 scope: set[str] | None = None) -> bool:
    """Visibility rule used by asset views, search, and audits.

    Level 3 sees everything; ViewDeptAssets covers the caller's
    affiliation subtree; ViewOwn covers items the caller owns.
    """
    if level_of(mask) >= 3:
        return True
    if mask_grants(mask, Permission.VIEW_OWN) and item.owner_id == user_id:
        return True
    if mask_grants(mask, Permission.VIEW_DEPT_ASSETS):
        if scope is None:
            scope = scope_afflns(view, user_id)
        affln = item_affiliation(view, item)
        if affln is not None and affln_in_scope(affln, scope):
            return True
    return False


def visible_items(view, user_id: str, mask: int) -> list[Item]:
    scope = scope_afflns(view, user_id)
    return [
        item for item in view.all("item")
        if item_visible(view, item, user_id, mask, scope)
    ]
