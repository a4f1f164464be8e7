import pytest

from uuis import ServiceConfig, UuisService
from uuis.accounts import user_effective_mask
from uuis.auth import hash_password
from uuis.clock import ManualClock
from uuis.ids import Family
from uuis.models import (
    AclEntry,
    Affiliation,
    Category,
    InventoryEntry,
    Item,
    Location,
    User,
    UserRole,
    now_iso,
)
from uuis.permissions import LEVEL_MASKS

# one "[PASS] criterion" line per satisfied acceptance criterion; printed
# after the run so output capture cannot swallow them
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


ADMIN_PASSWORD = "Adm1nPass!"
PASSWORD = "Passw0rd!"

# pre-computed digest, scrypt is deliberately slow
_DIGEST = hash_password(PASSWORD, salt="fixedsalt")


@pytest.fixture
def clock():
    return ManualClock()


@pytest.fixture
def svc(clock, tmp_path):
    return UuisService(
        ServiceConfig(admin_password=ADMIN_PASSWORD,
                      backup_dir=str(tmp_path / "backups")),
        clock=clock,
    )


@pytest.fixture
def admin(svc):
    return svc.auth.login("admin", ADMIN_PASSWORD)


class World:
    """Direct-to-store fixture builder for organization/users/items."""

    def __init__(self, svc):
        self.svc = svc
        self.store = svc.store
        self.users: dict[str, User] = {}

    def add_affln(self, affln_id, name, code, tier):
        with self.store.transaction() as txn:
            txn.put("affln", Affiliation(affln_id, name, code, tier))
        return affln_id

    def add_user(self, code, level, affln_id, mask=None):
        with self.store.transaction() as txn:
            user = User(
                user_id=txn.next_id(Family.USER), user_code=code,
                last_name=code.title(), first_name="Test",
                password_digest=_DIGEST,
            )
            txn.put("user", user)
            role = UserRole(
                user_role_id=txn.next_id(Family.ROLE),
                user_id=user.user_id, title_id="", affln_id=affln_id,
            )
            txn.put("role", role)
            txn.put("acl", AclEntry(role.user_role_id,
                                    LEVEL_MASKS[level] if mask is None else mask))
        self.users[code] = user
        return user

    def add_location(self, code, affln_id):
        snap = self.store.snapshot()
        bldg = snap.all("bldg")[0]
        loctype = snap.all("loctype")[0]
        with self.store.transaction() as txn:
            loc = Location(
                loc_id=txn.next_id(Family.LOCATION), parent_loc_id=bldg.bldg_id,
                loc_code=code, loc_name=code, bldg_id=bldg.bldg_id,
                affln_id=affln_id, status="Available",
                loc_type_id=loctype.loc_type_id,
            )
            txn.put("loc", loc)
        return loc

    def add_category(self, code, parent_cat_id):
        with self.store.transaction() as txn:
            cat = Category(txn.next_id(Family.CATEGORY), parent_cat_id, code, code)
            txn.put("cat", cat)
        return cat

    def add_item(self, code, owner_id, loc_id, cat_id=None, description=None):
        snap = self.store.snapshot()
        if cat_id is None:
            cat_id = next(c.cat_id for c in snap.all("cat")
                          if c.parent_cat_id != "0")
        with self.store.transaction() as txn:
            item = Item(
                item_id=txn.next_id(Family.ITEM),
                item_description=description or f"item {code}",
                code=code, serial_number=f"SN-{code}",
                cat_id=cat_id, owner_id=owner_id, loc_id=loc_id,
                date_modified=now_iso(), status="Available",
            )
            txn.put("item", item)
            txn.put("inv", InventoryEntry(item.item_id, 1, "Available",
                                          "0000000000", item.date_modified))
        return item

    def login(self, code, password=PASSWORD):
        return self.svc.auth.login(code, password)

    def mask_of(self, code):
        return user_effective_mask(self.store.snapshot(),
                                   self.users[code].user_id)


@pytest.fixture
def world(svc):
    """Two faculties, four departments, a location per department."""
    w = World(svc)
    w.faculties = ["1110000000", "1220000000"]
    w.departments = ["1110000001", "1110000002", "1220000001", "1220000002"]
    w.add_affln("1110000000", "Science", "SCI", "Faculty")
    w.add_affln("1220000000", "Arts", "ART", "Faculty")
    w.add_affln("1110000001", "Physics", "PHY", "Department")
    w.add_affln("1110000002", "Chemistry", "CHM", "Department")
    w.add_affln("1220000001", "History", "HIS", "Department")
    w.add_affln("1220000002", "Music", "MUS", "Department")
    w.locations = {d: w.add_location(f"LOC-{d[-4:]}", d) for d in w.departments}
    return w
