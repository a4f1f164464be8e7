"""HTTP gateway: a FastAPI application over a single service instance.

Every response uses the same JSON envelope: ``{"status": "ok", "payload":
...}`` on success, ``{"status": "error", "error_code": ..., "detail": ...}``
on failure, and ``{"status": "confirm", "confirmation_token": ...,
"preview": ...}`` (HTTP 202) when an action needs a second, confirmed call.
Authentication is a bearer token from ``POST /auth/login``.
"""

from __future__ import annotations

from dataclasses import asdict, is_dataclass
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse

from .. import errors
from ..audit import ReportSpec
from ..auth import Session
from ..permissions import Permission, mask_grants
from ..service import UuisService
from . import schemas

# error code -> HTTP status; anything unlisted is a 400
_STATUS = {
    "InvalidCredentials": 401,
    "ChallengeRequired": 401,
    "ChallengeFailed": 401,
    "UnknownSession": 401,
    "SessionExpired": 401,
    "AccountLocked": 423,
    "PermissionDenied": 403,
    "LevelNotLower": 403,
    "CosignFailed": 403,
    "RefuseHidden": 403,
    "NotOwner": 403,
    "UnknownFaculty": 404,
    "UnknownParent": 404,
    "UnknownTarget": 404,
    "UnknownKey": 404,
    "UnknownReference": 404,
    "UnknownError": 404,
    "UnknownField": 404,
    "NoVisibleData": 404,
    "Conflict": 409,
    "DuplicateName": 409,
    "DuplicateCode": 409,
    "DuplicateSerial": 409,
    "AlreadyGrouped": 409,
    "NotPending": 409,
    "NotAvailable": 409,
    "NotCheckedOut": 409,
    "NonEmptyTarget": 409,
    "FacultySpaceExhausted": 409,
    "DigestMismatch": 409,
    "InvalidConfirmationToken": 409,
    "ConfirmationRequired": 409,
    "StorageFailure": 503,
    "StorageUnavailable": 503,
    "BindFailure": 503,
}

# menu entries the web console shows or hides per account
_CAPABILITIES = {
    "view_assets": Permission.VIEW_OWN,
    "view_department_assets": Permission.VIEW_DEPT_ASSETS,
    "manage_assets": Permission.MANAGE_ASSETS,
    "submit_request": Permission.SUBMIT_REQUEST,
    "approve_requests": Permission.APPROVE_L1,
    "manage_users": Permission.MANAGE_USERS,
    "create_department": Permission.CREATE_DEPARTMENT,
    "create_faculty": Permission.CREATE_FACULTY,
    "add_location": Permission.ADD_LOCATION,
    "audit": Permission.AUDIT,
    "reports": Permission.REPORT,
    "backup": Permission.BACKUP,
    "bulk_import": Permission.BULK_IMPORT,
    "error_management": Permission.ERROR_MGMT,
}


def _data(value):
    if is_dataclass(value) and not isinstance(value, type):
        return asdict(value)
    if isinstance(value, (list, tuple, set)):
        return [_data(v) for v in sorted(value) if not is_dataclass(v)] \
            if isinstance(value, set) else [_data(v) for v in value]
    return value


def _ok(payload=None) -> dict:
    return {"status": "ok", "payload": _data(payload)}


def create_app(service: UuisService) -> FastAPI:
    app = FastAPI(title="University Inventory Service", docs_url=None,
                  redoc_url=None)

    @app.exception_handler(errors.UuisError)
    async def _uuis_error(request: Request, exc: errors.UuisError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 400),
            content={"status": "error", "error_code": exc.code,
                     "detail": exc.message,
                     "context": {k: _data(v) for k, v in exc.context.items()}},
        )

    def current_session(authorization: Optional[str] = Header(default=None)) -> Session:
        if not authorization or not authorization.lower().startswith("bearer "):
            raise errors.UnknownSession("missing bearer token")
        return service.auth.require(authorization.split(" ", 1)[1].strip())

    def two_phase(action: str, preview: str, token: Optional[str]):
        """Returns a 202 response for phase one, None when cleared to run."""
        pending = service.confirm_or_pending(action, preview, token)
        if pending is None:
            return None
        return JSONResponse(status_code=202, content={
            "status": "confirm", "confirmation_token": pending.token,
            "preview": pending.preview, "payload": None})

    def session_payload(session: Session) -> dict:
        return {
            "token": session.token, "user_id": session.user_id,
            "user_code": session.user_code, "level": session.level,
            "effective_mask": session.effective_mask,
            "must_change_password": session.must_change_password,
        }

    # -- liveness --

    @app.get("/health")
    def health():
        return {"status": "ok"}

    # -- authentication --

    @app.post("/auth/login")
    def login(body: schemas.LoginBody):
        session = service.auth.login(body.user_code, body.password,
                                     body.challenge_answer)
        return _ok(session_payload(session))

    @app.post("/auth/logout")
    def logout(authorization: Optional[str] = Header(default=None)):
        if not authorization or not authorization.lower().startswith("bearer "):
            raise errors.UnknownSession("missing bearer token")
        service.auth.logout(authorization.split(" ", 1)[1].strip())
        return _ok()

    @app.get("/auth/session")
    def whoami(session: Session = Depends(current_session)):
        return _ok(session_payload(session))

    @app.post("/auth/password")
    def change_password(body: schemas.ChangePasswordBody,
                        session: Session = Depends(current_session)):
        service.auth.change_password(session.token, body.old_password,
                                     body.new_password, body.new_password_repeat)
        return _ok()

    @app.post("/auth/unlock")
    def unlock(body: schemas.UnlockBody,
               session: Session = Depends(current_session)):
        service.auth.unlock_user(session.token, body.user_code)
        return _ok()

    @app.get("/capabilities")
    def capabilities(session: Session = Depends(current_session)):
        return _ok({name: mask_grants(session.effective_mask, perm)
                    for name, perm in _CAPABILITIES.items()})

    # -- users and organization --

    @app.get("/users/{user_id}/profile")
    def view_profile(user_id: str, session: Session = Depends(current_session)):
        return _ok(service.directory.view_edit_profile(session, user_id, {}))

    @app.patch("/users/{user_id}/profile")
    def edit_profile(user_id: str, body: schemas.ProfileEditBody,
                     session: Session = Depends(current_session)):
        return _ok(service.directory.view_edit_profile(session, user_id,
                                                       body.edits))

    @app.patch("/roles/{role_id}")
    def set_role_mask(role_id: str, body: schemas.RoleMaskBody,
                      session: Session = Depends(current_session)):
        return _ok(service.directory.update_role_profile(session, role_id,
                                                         body.mask))

    @app.post("/users/import")
    def import_users(body: schemas.CsvImportBody,
                     session: Session = Depends(current_session)):
        return _ok(service.directory.bulk_import_users(session, body.csv_text))

    @app.post("/org/faculties")
    def create_faculty(body: schemas.FacultyBody,
                       session: Session = Depends(current_session)):
        cosigner = None
        if body.cosigner_code is not None:
            cosigner = (body.cosigner_code, body.cosigner_password or "")
        return _ok(service.directory.create_faculty(session, body.name,
                                                    body.code, cosigner))

    @app.post("/org/departments")
    def create_department(body: schemas.DepartmentBody,
                          session: Session = Depends(current_session)):
        return _ok(service.directory.create_department(
            session, body.name, body.code, body.faculty,
            (body.cosigner_code, body.cosigner_password)))

    @app.post("/org/locations")
    def add_location(body: schemas.LocationBody,
                     session: Session = Depends(current_session)):
        return _ok(service.directory.add_location(
            session, body.name, body.code, body.loc_type_id,
            body.parent, body.owner, body.comment))

    # -- assets --

    @app.get("/assets")
    def view_assets(session: Session = Depends(current_session),
                    code: Optional[str] = None, status: Optional[str] = None,
                    loc_id: Optional[str] = None, owner_id: Optional[str] = None,
                    cat_id: Optional[str] = None):
        filters = {k: v for k, v in (("code", code), ("status", status),
                                     ("loc_id", loc_id), ("owner_id", owner_id),
                                     ("cat_id", cat_id)) if v is not None}
        return _ok(service.assets.view_assets(session, filters or None))

    @app.post("/assets")
    def add_asset(body: schemas.AssetBody,
                  session: Session = Depends(current_session)):
        return _ok(service.assets.add_asset(session, body.fields,
                                            body.properties))

    @app.patch("/assets")
    def update_assets(body: schemas.AssetUpdateBody,
                      session: Session = Depends(current_session)):
        preview = (f"update {sorted(body.changes)} on "
                   f"{len(body.targets)} item(s)")
        pending = two_phase("update_assets", preview, body.confirm_token)
        if pending is not None:
            return pending
        return _ok(service.assets.update_assets(session, set(body.targets),
                                                body.changes))

    @app.post("/assets/import")
    def bulk_add_assets(body: schemas.CsvImportBody,
                        session: Session = Depends(current_session)):
        lines = max(0, len(body.csv_text.strip().splitlines()) - 1)
        pending = two_phase("bulk_add_assets", f"import {lines} asset row(s)",
                            body.confirm_token)
        if pending is not None:
            return pending
        return _ok(service.assets.bulk_add_assets(session, body.csv_text))

    @app.post("/assets/group")
    def group_assets(body: schemas.GroupBody,
                     session: Session = Depends(current_session)):
        selection = set(body.item_ids)
        action = service.assets.resolve_grouping(session, selection)
        if action.resolution == "NoOp":
            raise errors.AlreadyGrouped(action.detail)
        if action.resolution == "RefuseHidden":
            raise errors.RefuseHidden(action.detail)
        preview = f"{action.resolution}: {action.detail or 'group the selection'}"
        pending = two_phase("group_assets", preview, body.confirm_token)
        if pending is not None:
            return pending
        return _ok(service.assets.group_assets(session, selection, confirm=True))

    @app.post("/assets/{item_id}/checkout")
    def checkout(item_id: str, session: Session = Depends(current_session)):
        return _ok(service.assets.checkout_item(session, item_id))

    @app.post("/assets/{item_id}/return")
    def return_item(item_id: str, session: Session = Depends(current_session)):
        return _ok(service.assets.return_item(session, item_id))

    # -- requests --

    @app.post("/requests")
    def submit_request(body: schemas.RequestBody,
                       session: Session = Depends(current_session)):
        pending = two_phase("submit_request",
                            f"submit {body.req_type} request",
                            body.confirm_token)
        if pending is not None:
            return pending
        return _ok(service.workflow.submit_request(
            session, body.req_type, body.description,
            target=body.target, on_behalf_of=body.on_behalf_of))

    @app.get("/requests")
    def my_requests(session: Session = Depends(current_session)):
        return _ok(service.workflow.view_request_status(session))

    @app.get("/requests/pending")
    def pending_requests(session: Session = Depends(current_session)):
        return _ok(service.workflow.view_pending(session))

    @app.post("/requests/cancel")
    def cancel_requests(body: schemas.CancelBody,
                        session: Session = Depends(current_session)):
        pending = two_phase("cancel_request",
                            f"cancel {len(body.req_ids)} request(s)",
                            body.confirm_token)
        if pending is not None:
            return pending
        return _ok(service.workflow.cancel_request(session, set(body.req_ids)))

    @app.post("/requests/{req_id}/approve")
    def approve_request(req_id: str, body: schemas.ApproveBody,
                        session: Session = Depends(current_session)):
        pending = two_phase("approve_request", f"approve request {req_id}",
                            body.confirm_token)
        if pending is not None:
            return pending
        return _ok(service.workflow.approve_request(session, req_id,
                                                    body.formalization))

    @app.post("/requests/{req_id}/reject")
    def reject_request(req_id: str, body: schemas.RejectBody,
                       session: Session = Depends(current_session)):
        pending = two_phase("reject_request", f"reject request {req_id}",
                            body.confirm_token)
        if pending is not None:
            return pending
        return _ok(service.workflow.reject_request(session, req_id,
                                                   body.comment))

    @app.get("/notifications")
    def notifications(session: Session = Depends(current_session)):
        return _ok(service.workflow.notifications(session))

    # -- audit, reports, errors --

    @app.get("/audit/options")
    def audit_options(session: Session = Depends(current_session)):
        return _ok(service.audit.audit_options(session))

    @app.get("/audit/logs")
    def audit_logs(category: str, key: Optional[str] = None,
                   start: Optional[str] = None, end: Optional[str] = None,
                   session: Session = Depends(current_session)):
        lookup = (start, end) if category == "time" else key
        return _ok(service.audit.audit_logs(session, category, lookup))

    @app.post("/reports")
    def produce_report(body: schemas.ReportBody,
                       session: Session = Depends(current_session)):
        spec = ReportSpec(body.category, set(body.item_ids), body.facets)
        return _ok(service.audit.produce_report(session, spec))

    @app.post("/reports/export")
    def export_report(body: schemas.ReportBody,
                      session: Session = Depends(current_session)):
        spec = ReportSpec(body.category, set(body.item_ids), body.facets)
        rows = service.audit.produce_report(session, spec)
        data = service.audit.export_view(session, rows, body.format)
        media = "text/csv" if body.format == "csv" else "text/plain"
        return Response(content=data, media_type=media)

    @app.get("/errors")
    def list_errors(severity: Optional[str] = None,
                    contains: Optional[str] = None,
                    session: Session = Depends(current_session)):
        return _ok(service.audit.list_errors(session, severity, contains))

    @app.post("/errors/{error_id}/annotations")
    def annotate_error(error_id: int, body: schemas.AnnotationBody,
                       session: Session = Depends(current_session)):
        return _ok(service.audit.annotate_error(session, error_id, body.note))

    # -- search --

    @app.get("/search")
    def simple_search(q: str = Query(...), table: str = "item",
                      session: Session = Depends(current_session)):
        return _ok(service.search.simple_search(session, q, table))

    @app.post("/search/advanced")
    def advanced_search(body: schemas.AdvancedSearchBody,
                        session: Session = Depends(current_session)):
        return _ok(service.search.advanced_search_text(
            session, body.query, body.table,
            page=body.page, page_size=body.page_size))

    # -- backup --

    @app.post("/backups")
    def run_backup(body: schemas.BackupBody,
                   session: Session = Depends(current_session)):
        return _ok(service.backups.run_backup(session, body.scope))

    return app
