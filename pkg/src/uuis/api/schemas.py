"""Pydantic request/response bodies for the HTTP gateway."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class LoginBody(BaseModel):
    user_code: str
    password: str
    challenge_answer: Optional[str] = None


class ChangePasswordBody(BaseModel):
    old_password: str
    new_password: str
    new_password_repeat: str


class UnlockBody(BaseModel):
    user_code: str


class ProfileEditBody(BaseModel):
    edits: dict[str, str] = Field(default_factory=dict)


class RoleMaskBody(BaseModel):
    mask: int


class CsvImportBody(BaseModel):
    csv_text: str
    confirm_token: Optional[str] = None


class FacultyBody(BaseModel):
    name: str
    code: str
    cosigner_code: Optional[str] = None
    cosigner_password: Optional[str] = None


class DepartmentBody(BaseModel):
    name: str
    code: str
    faculty: str
    cosigner_code: str
    cosigner_password: str


class LocationBody(BaseModel):
    name: str
    code: str
    loc_type_id: str
    parent: str
    owner: str
    comment: str = ""


class AssetBody(BaseModel):
    fields: dict[str, str]
    properties: list[tuple[str, str]] = Field(default_factory=list)


class AssetUpdateBody(BaseModel):
    targets: list[str]
    changes: dict[str, str]
    confirm_token: Optional[str] = None


class GroupBody(BaseModel):
    item_ids: list[str]
    confirm_token: Optional[str] = None


class RequestBody(BaseModel):
    req_type: str
    description: str
    target: Optional[str] = None
    on_behalf_of: Optional[str] = None
    confirm_token: Optional[str] = None


class CancelBody(BaseModel):
    req_ids: list[str]
    confirm_token: Optional[str] = None


class ApproveBody(BaseModel):
    formalization: dict[str, str] = Field(default_factory=dict)
    confirm_token: Optional[str] = None


class RejectBody(BaseModel):
    comment: str = ""
    confirm_token: Optional[str] = None


class ReportBody(BaseModel):
    category: str
    item_ids: list[str] = Field(default_factory=list)
    facets: list[tuple[str, str, str]] = Field(default_factory=list)
    format: str = "csv"


class AdvancedSearchBody(BaseModel):
    query: str
    table: str = "item"
    page: int = 1
    page_size: int = 50


class BackupBody(BaseModel):
    scope: str = "all"


class AnnotationBody(BaseModel):
    note: str


class Envelope(BaseModel):
    status: str
    payload: Any = None
    error_code: Optional[str] = None
    detail: Optional[str] = None
    context: Optional[dict] = None
    confirmation_token: Optional[str] = None
    preview: Optional[str] = None
