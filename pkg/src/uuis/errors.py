"""Error hierarchy shared by every module.

Each error carries a stable machine-readable ``code`` that round-trips
through the HTTP envelope and the CLI exit mapping.
"""

from __future__ import annotations


class UuisError(Exception):
    """Base class; ``code`` defaults to the class name."""

    code = "UuisError"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.context = context


def _err(name: str, base=UuisError) -> type:
    cls = type(name, (base,), {"code": name})
    cls.__module__ = __name__
    return cls


# core-domain
CounterOverflow = _err("CounterOverflow")
MalformedAffiliationId = _err("MalformedAffiliationId")
UnknownPermission = _err("UnknownPermission")
ValidationError = _err("ValidationError")

# auth-session
InvalidCredentials = _err("InvalidCredentials")
AccountLocked = _err("AccountLocked")
ChallengeRequired = _err("ChallengeRequired")
ChallengeFailed = _err("ChallengeFailed")
UnknownSession = _err("UnknownSession")
SessionExpired = _err("SessionExpired")
OldPasswordMismatch = _err("OldPasswordMismatch")
NewPasswordsDiffer = _err("NewPasswordsDiffer")
WeakPassword = _err("WeakPassword")

# directory-org
PermissionDenied = _err("PermissionDenied")
LevelNotLower = _err("LevelNotLower")
CosignFailed = _err("CosignFailed")
DuplicateName = _err("DuplicateName")
UnknownFaculty = _err("UnknownFaculty")
FacultySpaceExhausted = _err("FacultySpaceExhausted")
UnknownParent = _err("UnknownParent")
CycleDetected = _err("CycleDetected")
DuplicateCode = _err("DuplicateCode")
MalformedHeader = _err("MalformedHeader")
EmptyFile = _err("EmptyFile")

# assets-inventory
DuplicateSerial = _err("DuplicateSerial")
UnknownReference = _err("UnknownReference")
EmptySelection = _err("EmptySelection")
RowFormatError = _err("RowFormatError")
AlreadyGrouped = _err("AlreadyGrouped")
RefuseHidden = _err("RefuseHidden")
ConfirmationRequired = _err("ConfirmationRequired")
NotAvailable = _err("NotAvailable")
NotCheckedOut = _err("NotCheckedOut")

# request-workflow
UnknownTarget = _err("UnknownTarget")
NotOwner = _err("NotOwner")
NotPending = _err("NotPending")
MissingFields = _err("MissingFields")

# audit / report / search
UnknownKey = _err("UnknownKey")
NoVisibleData = _err("NoVisibleData")
UnknownFormat = _err("UnknownFormat")
UnknownError = _err("UnknownError")
UnknownField = _err("UnknownField")


class QuerySyntaxError(UuisError):
    code = "SyntaxError"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at {position})")
        self.position = position


# backup-export
StorageFailure = _err("StorageFailure")
InvalidSchedule = _err("InvalidSchedule")
DigestMismatch = _err("DigestMismatch")
NonEmptyTarget = _err("NonEmptyTarget")

# persistence / gateway
Conflict = _err("Conflict")
BindFailure = _err("BindFailure")
StorageUnavailable = _err("StorageUnavailable")
InvalidConfirmationToken = _err("InvalidConfirmationToken")
