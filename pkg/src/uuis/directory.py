"""User and organization administration.

Covers profile view/edit, role permission updates, faculty/department
creation with cosignature, location management, and bulk user import
from CSV.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field, replace

from . import errors
from .accounts import find_user_by_code, roles_of, user_effective_mask, user_level
from .auth import Session, hash_password, verify_password
from .ids import (
    Family,
    UNIVERSITY_ID,
    AffiliationTier,
    affiliation_tier,
    department_id,
    faculty_id,
)
from .models import (
    Affiliation,
    AclEntry,
    Building,
    Location,
    User,
    UserInfo,
    UserRole,
    now_iso,
    touch,
)
from .permissions import Permission, mask_grants
from .store import Store

USER_IMPORT_HEADER = [
    "user_code", "last_name", "first_name", "email", "dob",
    "title_code", "affln_code", "initial_password",
]

_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")
_PHONE_RE = re.compile(r"^[0-9+\-() ]{4,20}$")

PROFILE_FIELDS = {"email", "phone", "mobile", "street_address"}


@dataclass
class ImportReport:
    created: int = 0
    created_ids: list[str] = field(default_factory=list)
    rejected: list[tuple[int, str]] = field(default_factory=list)


class DirectoryService:
    def __init__(self, store: Store):
        self._store = store

    # -- profiles and roles --

    def view_edit_profile(self, session: Session, target_user: str,
                          edits: dict[str, str]) -> UserInfo:
        if target_user != session.user_id and not mask_grants(
                session.effective_mask, Permission.MANAGE_USERS):
            raise errors.PermissionDenied("may only edit own profile")
        info = self._store.get("userinfo", target_user)
        if info is None:
            if self._store.get("user", target_user) is None:
                raise errors.ValidationError(f"unknown user {target_user}")
            info = UserInfo(user_id=target_user)
        if not edits:
            return info
        unknown = set(edits) - PROFILE_FIELDS
        if unknown:
            raise errors.ValidationError(f"fields not editable: {sorted(unknown)}")
        if "email" in edits and not _EMAIL_RE.match(edits["email"]):
            raise errors.ValidationError(f"malformed email: {edits['email']}")
        for key in ("phone", "mobile"):
            if key in edits and edits[key] and not _PHONE_RE.match(edits[key]):
                raise errors.ValidationError(f"malformed {key}: {edits[key]}")
        updated = replace(info, **edits)
        with self._store.transaction(actor=session.user_id) as txn:
            txn.put("userinfo", updated)
            txn.log(target_user, "UPDATE", f"profile fields {sorted(edits)} updated")
        return updated

    def update_role_profile(self, session: Session, target_role: str,
                            new_mask: int) -> AclEntry:
        if not mask_grants(session.effective_mask, Permission.MANAGE_USERS):
            raise errors.PermissionDenied("ManageUsers required")
        snap = self._store.snapshot()
        role = snap.get("role", target_role)
        if role is None:
            raise errors.ValidationError(f"unknown role {target_role}")
        if user_level(snap, role.user_id) >= session.level:
            raise errors.LevelNotLower(
                f"target level {user_level(snap, role.user_id)} not below {session.level}")
        entry = AclEntry(user_role_id=target_role, mask=new_mask)
        with self._store.transaction(actor=session.user_id) as txn:
            txn.put("acl", entry)
            txn.log(role.user_id, "UPDATE", f"role {target_role} mask set to {new_mask}")
        return entry

    # -- organization structure --

    def _verify_cosigner(self, snap, credentials: tuple[str, str],
                         required_affln: str) -> None:
        """Cosigner must authenticate and hold ApproveL3 in the given scope."""
        code, password = credentials
        cosigner = find_user_by_code(snap, code)
        if cosigner is None or not verify_password(password, cosigner.password_digest):
            raise errors.CosignFailed("cosigner credentials rejected")
        mask = user_effective_mask(snap, cosigner.user_id)
        if not mask_grants(mask, Permission.APPROVE_L3):
            raise errors.CosignFailed("cosigner lacks approval authority")
        afflns = {role.affln_id for role, _ in roles_of(snap, cosigner.user_id)
                  if role.status == "Accepted"}
        if required_affln not in afflns:
            raise errors.CosignFailed("cosigner not in the required affiliation")

    def _is_principal(self, snap, user_id: str) -> bool:
        mask = user_effective_mask(snap, user_id)
        if not mask_grants(mask, Permission.APPROVE_L3):
            return False
        return any(role.affln_id == UNIVERSITY_ID and role.status == "Accepted"
                   for role, _ in roles_of(snap, user_id))

    def _check_unique_affln(self, snap, name: str, code: str) -> None:
        if not name or not code:
            raise errors.ValidationError("name and code are required")
        if snap.find("affln", lambda a: a.affln_name == name):
            raise errors.DuplicateName(name)
        if snap.find("affln", lambda a: a.affln_code == code):
            raise errors.DuplicateCode(code)

    def create_department(self, session: Session, name: str, code: str,
                          faculty: str, cosigner: tuple[str, str]) -> Affiliation:
        if not mask_grants(session.effective_mask, Permission.CREATE_DEPARTMENT):
            raise errors.PermissionDenied("CreateDepartment required")
        snap = self._store.snapshot()
        parent = snap.get("affln", faculty)
        if parent is None or parent.tier != AffiliationTier.FACULTY.value:
            raise errors.UnknownFaculty(faculty)
        self._check_unique_affln(snap, name, code)
        self._verify_cosigner(snap, cosigner, faculty)
        with self._store.transaction(actor=session.user_id) as txn:
            while True:
                tail = txn.next_counter(f"dept:{faculty}") + 1
                new_id = department_id(faculty, tail)
                if snap.get("affln", new_id) is None:
                    break
            affln = Affiliation(new_id, name, code,
                                AffiliationTier.DEPARTMENT.value)
            txn.put("affln", affln)
            txn.log(affln.affln_id, "CREATE", f"department {name} under {faculty}")
        return affln

    def create_faculty(self, session: Session, name: str, code: str,
                       cosigner: tuple[str, str] | None = None) -> Affiliation:
        if not mask_grants(session.effective_mask, Permission.CREATE_FACULTY):
            raise errors.PermissionDenied("CreateFaculty required")
        snap = self._store.snapshot()
        self._check_unique_affln(snap, name, code)
        if not self._is_principal(snap, session.user_id):
            if cosigner is None:
                raise errors.CosignFailed("principal cosignature required")
            self._verify_cosigner(snap, cosigner, UNIVERSITY_ID)
        with self._store.transaction(actor=session.user_id) as txn:
            while True:
                n = txn.next_counter("faculty") + 1
                if n > 99:
                    raise errors.FacultySpaceExhausted("all 99 faculty codes in use")
                new_id = faculty_id(f"{n:02d}")
                if snap.get("affln", new_id) is None:
                    break
            affln = Affiliation(new_id, name, code,
                                AffiliationTier.FACULTY.value)
            txn.put("affln", affln)
            txn.log(affln.affln_id, "CREATE", f"faculty {name}")
        return affln

    def add_location(self, session: Session, name: str, code: str,
                     loc_type_id: str, parent: str, owner: str,
                     comment: str = "") -> Location:
        if not mask_grants(session.effective_mask, Permission.ADD_LOCATION):
            raise errors.PermissionDenied("AddLocation required")
        if not name or not code:
            raise errors.ValidationError("name and code are required")
        snap = self._store.snapshot()
        if snap.find("loc", lambda l: l.loc_code == code):
            raise errors.DuplicateCode(code)
        building = self._resolve_building(snap, parent)
        if building is None:
            raise errors.CycleDetected(f"parent chain of {parent} does not reach a building")
        if snap.get("affln", owner) is None:
            raise errors.ValidationError(f"unknown owner affiliation {owner}")
        if snap.get("loctype", loc_type_id) is None:
            raise errors.ValidationError(f"unknown location type {loc_type_id}")
        with self._store.transaction(actor=session.user_id) as txn:
            loc = Location(
                loc_id=txn.next_id(Family.LOCATION),
                parent_loc_id=parent, loc_code=code, loc_name=name,
                bldg_id=building, affln_id=owner, status="Available",
                loc_type_id=loc_type_id, comment=comment,
            )
            if loc.loc_id == parent:
                raise errors.CycleDetected("location cannot parent itself")
            txn.put("loc", loc)
            txn.log(loc.loc_id, "CREATE", f"location {name} under {parent}")
        return loc

    def _resolve_building(self, snap, parent: str) -> str | None:
        """Walk the parent chain to its building; None on breaks/cycles."""
        seen = set()
        current = parent
        while current not in seen:
            seen.add(current)
            if snap.get("bldg", current) is not None:
                return current
            loc = snap.get("loc", current)
            if loc is None:
                raise errors.UnknownParent(parent)
            current = loc.parent_loc_id
        return None

    # -- bulk import --

    def bulk_import_users(self, session: Session, csv_text: str) -> ImportReport:
        if not mask_grants(session.effective_mask, Permission.BULK_IMPORT) or \
           not mask_grants(session.effective_mask, Permission.MANAGE_USERS):
            raise errors.PermissionDenied("BulkImport and ManageUsers required")
        rows = list(csv.reader(io.StringIO(csv_text)))
        if not rows:
            raise errors.EmptyFile()
        header = [h.strip() for h in rows[0]]
        if header != USER_IMPORT_HEADER:
            raise errors.MalformedHeader(f"expected columns {USER_IMPORT_HEADER}")
        snap = self._store.snapshot()
        titles = {t.title_code: t for t in snap.all("title")}
        afflns = {a.affln_code: a for a in snap.all("affln")}
        existing_codes = {u.user_code for u in snap.all("user")}
        report = ImportReport()
        accepted: list[dict] = []
        seen_codes: set[str] = set()
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(USER_IMPORT_HEADER):
                report.rejected.append((lineno, "wrong number of columns"))
                continue
            rec = dict(zip(USER_IMPORT_HEADER, (c.strip() for c in row)))
            if not rec["user_code"]:
                report.rejected.append((lineno, "missing user_code"))
            elif rec["user_code"] in existing_codes or rec["user_code"] in seen_codes:
                report.rejected.append((lineno, "duplicate user_code"))
            elif rec["title_code"] not in titles:
                report.rejected.append((lineno, f"unknown title_code {rec['title_code']}"))
            elif rec["affln_code"] not in afflns:
                report.rejected.append((lineno, f"unknown affln_code {rec['affln_code']}"))
            elif rec["email"] and not _EMAIL_RE.match(rec["email"]):
                report.rejected.append((lineno, "malformed email"))
            else:
                seen_codes.add(rec["user_code"])
                accepted.append(rec)
        with self._store.transaction(actor=session.user_id) as txn:
            for rec in accepted:
                title = titles[rec["title_code"]]
                user = User(
                    user_id=txn.next_id(Family.USER),
                    user_code=rec["user_code"],
                    last_name=rec["last_name"],
                    first_name=rec["first_name"],
                    password_digest=hash_password(rec["initial_password"]),
                    must_change_password=1,
                )
                txn.put("user", user)
                txn.put("userinfo", UserInfo(user_id=user.user_id,
                                             email=rec["email"], dob=rec["dob"]))
                role = UserRole(
                    user_role_id=txn.next_id(Family.ROLE),
                    user_id=user.user_id,
                    title_id=title.title_id,
                    affln_id=afflns[rec["affln_code"]].affln_id,
                )
                txn.put("role", role)
                txn.put("acl", AclEntry(role.user_role_id, title.default_mask))
                report.created += 1
                report.created_ids.append(user.user_id)
            txn.log(session.user_id, "IMPORT",
                    f"user import: {report.created} created, "
                    f"{len(report.rejected)} rejected")
        return report

    def rejected_rows_csv(self, csv_text: str, report: ImportReport) -> str:
        """Rejected rows rendered back as CSV with a trailing reason column."""
        rows = list(csv.reader(io.StringIO(csv_text)))
        reasons = dict(report.rejected)
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(USER_IMPORT_HEADER + ["reason"])
        for lineno, row in enumerate(rows[1:], start=2):
            if lineno in reasons:
                writer.writerow(row + [reasons[lineno]])
        return out.getvalue()
