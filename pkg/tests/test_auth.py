import pytest

from uuis import errors
from uuis.auth import check_password_policy, hash_password, verify_password
from uuis.ids import UNIVERSITY_ID

from conftest import ADMIN_PASSWORD, PASSWORD, World


@pytest.fixture
def users(svc):
    w = World(svc)
    w.add_user("jsmith", 0, UNIVERSITY_ID)
    w.add_user("boss", 2, UNIVERSITY_ID)
    return w


def _fail_login(svc, code, answer=None):
    with pytest.raises((errors.InvalidCredentials, errors.ChallengeRequired,
                        errors.ChallengeFailed)) as exc_info:
        svc.auth.login(code, "wrong-pass", challenge_answer=answer)
    return exc_info.value


def _login_with_challenge(svc, code, password):
    """Answer the arithmetic challenge when one is demanded."""
    try:
        return svc.auth.login(code, password)
    except errors.ChallengeRequired as exc:
        question = exc.context["question"]
        a, b = (int(n) for n in question.replace("?", "").split() if n.isdigit())
        return svc.auth.login(code, password, challenge_answer=str(a + b))


class TestLogin:
    def test_success_resets_attempts(self, svc, users):
        _fail_login(svc, "jsmith")
        _fail_login(svc, "jsmith", answer="0")  # deliberately wrong challenge
        user = svc.store.get("user", users.users["jsmith"].user_id)
        assert user.login_attempts == 1  # failed challenge is not an attempt
        session = _login_with_challenge(svc, "jsmith", PASSWORD)
        assert session.user_code == "jsmith"
        user = svc.store.get("user", users.users["jsmith"].user_id)
        assert user.login_attempts == 0

    def test_three_strikes_locks(self, svc, users):
        _fail_login(svc, "jsmith")
        for _ in range(2):
            exc = _fail_login(svc, "jsmith")
            while not isinstance(exc, errors.InvalidCredentials):
                question = exc.context.get("question", "")
                nums = [int(n) for n in question.replace("?", "").split()
                        if n.isdigit()]
                exc = _fail_login(svc, "jsmith", answer=str(sum(nums)))
        with pytest.raises(errors.AccountLocked):
            svc.auth.login("jsmith", PASSWORD)

    def test_unknown_user(self, svc):
        with pytest.raises(errors.InvalidCredentials):
            svc.auth.login("nobody", "x")

    def test_unlock_requires_manage_users(self, svc, users):
        for _ in range(5):
            try:
                _fail_login(svc, "jsmith")
            except Exception:
                pass
        low = _login_with_challenge(svc, "boss", PASSWORD)
        svc.auth.unlock_user(low.token, "jsmith")
        assert svc.auth.login("jsmith", PASSWORD)

    def test_unlock_denied_without_bit(self, svc, users, admin):
        session = svc.auth.login("jsmith", PASSWORD)
        with pytest.raises(errors.PermissionDenied):
            svc.auth.unlock_user(session.token, "boss")

    def test_login_writes_one_log_record(self, svc, users):
        before = len(svc.store.all("log"))
        svc.auth.login("jsmith", PASSWORD)
        assert len(svc.store.all("log")) == before + 1


class TestSessions:
    def test_logout_invalidates(self, svc, admin):
        svc.auth.logout(admin.token)
        with pytest.raises(errors.UnknownSession):
            svc.auth.touch(admin.token)
        with pytest.raises(errors.UnknownSession):
            svc.auth.logout(admin.token)

    def test_timeout_boundary_inclusive(self, svc, clock, users):
        session = svc.auth.login("jsmith", PASSWORD)
        clock.advance(minutes=29, seconds=59)
        svc.auth.touch(session.token)  # 29:59 refreshes
        clock.advance(minutes=30)
        svc.auth.touch(session.token)  # exactly 30:00 still inclusive
        clock.advance(minutes=30, seconds=1)
        with pytest.raises(errors.SessionExpired):
            svc.auth.touch(session.token)

    def test_tokens_never_repeat(self, svc, users):
        seen = set()
        for _ in range(200):
            session = svc.auth.login("jsmith", PASSWORD)
            assert session.token not in seen
            seen.add(session.token)
            svc.auth.logout(session.token)


class TestChangePassword:
    def test_change_and_old_stops_working(self, svc, users):
        session = svc.auth.login("jsmith", PASSWORD)
        svc.auth.change_password(session.token, PASSWORD, "Np9!xxxx", "Np9!xxxx")
        with pytest.raises(errors.InvalidCredentials):
            svc.auth.login("jsmith", PASSWORD)
        # the prior failure demands a challenge on the next login
        assert _login_with_challenge(svc, "jsmith", "Np9!xxxx")

    def test_mismatched_new_passwords(self, svc, users):
        session = svc.auth.login("jsmith", PASSWORD)
        with pytest.raises(errors.NewPasswordsDiffer):
            svc.auth.change_password(session.token, PASSWORD, "Np9!xxxx", "other")
        assert svc.auth.login("jsmith", PASSWORD)

    def test_wrong_old_password(self, svc, users):
        session = svc.auth.login("jsmith", PASSWORD)
        with pytest.raises(errors.OldPasswordMismatch):
            svc.auth.change_password(session.token, "nope", "Np9!xxxx", "Np9!xxxx")

    def test_weak_rejected(self, svc, users):
        session = svc.auth.login("jsmith", PASSWORD)
        with pytest.raises(errors.WeakPassword):
            svc.auth.change_password(session.token, PASSWORD, "short1", "short1")
        with pytest.raises(errors.WeakPassword):
            svc.auth.change_password(session.token, PASSWORD,
                                     "alllowercase", "alllowercase")


def test_digest_never_cleartext(svc, users):
    for user in svc.store.all("user"):
        assert PASSWORD not in user.password_digest
        assert ADMIN_PASSWORD not in user.password_digest


def test_password_hash_roundtrip():
    digest = hash_password("S3cret!!")
    assert verify_password("S3cret!!", digest)
    assert not verify_password("S3cret!?", digest)


def test_policy_accepts_two_classes():
    check_password_policy("abcdefg9")
    check_password_policy("ABCdefgh")
