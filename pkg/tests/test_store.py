import threading

import pytest

from uuis import errors
from uuis.ids import Family
from uuis.models import Group
from uuis.store import Store


def _put_group(store, group_id, description=""):
    with store.transaction() as txn:
        txn.put("group", Group(group_id=group_id, description=description))


def test_commit_visible_abort_invisible():
    store = Store()
    _put_group(store, "5000000001")
    assert store.get("group", "5000000001") is not None
    with pytest.raises(RuntimeError):
        with store.transaction() as txn:
            txn.put("group", Group(group_id="5000000002"))
            raise RuntimeError("boom")
    assert store.get("group", "5000000002") is None


def test_snapshot_isolation():
    store = Store()
    _put_group(store, "5000000001", "old")
    snap = store.snapshot()
    _put_group(store, "5000000001", "new")
    assert snap.get("group", "5000000001").description == "old"
    assert store.get("group", "5000000001").description == "new"
    snap2, snap3 = store.snapshot(), store.snapshot()
    assert snap2.all("group") == snap3.all("group")


def test_conflict_single_winner():
    store = Store()
    _put_group(store, "g", "base")
    ctx_a, ctx_b = store.transaction(), store.transaction()
    txn_a, txn_b = ctx_a.__enter__(), ctx_b.__enter__()
    txn_a.put("group", Group(group_id="g", description="a"))
    txn_b.put("group", Group(group_id="g", description="b"))
    ctx_a.__exit__(None, None, None)
    with pytest.raises(errors.Conflict):
        ctx_b.__exit__(None, None, None)
    assert store.get("group", "g").description == "a"


def test_disjoint_parallel_writes_both_commit():
    store = Store()
    failures = []

    def writer(gid):
        try:
            _put_group(store, gid)
        except Exception as exc:  # pragma: no cover
            failures.append(exc)

    threads = [threading.Thread(target=writer, args=(f"g{i}",)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not failures
    assert store.snapshot().count("group") == 8


def test_sequences_never_repeat(tmp_path):
    path = tmp_path / "wal.jsonl"
    store = Store(path)
    ids = []
    for _ in range(5):
        with store.transaction() as txn:
            gid = txn.next_id(Family.CATEGORY)
            txn.put("group", Group(group_id=gid))
            ids.append(gid)
    # simulate a process kill and recovery
    recovered = Store(path)
    with recovered.transaction() as txn:
        ids.append(txn.next_id(Family.CATEGORY))
    assert len(set(ids)) == len(ids)


def test_crash_restart_durability(tmp_path):
    path = tmp_path / "wal.jsonl"
    store = Store(path)
    _put_group(store, "5000000001", "kept")
    with store.transaction() as txn:
        txn.log("5000000001", "CREATE", "group made")
    recovered = Store(path)
    assert recovered.get("group", "5000000001").description == "kept"
    assert [r.log_id for r in recovered.all("log")] == [1]


def test_log_append_only_and_commit_order():
    store = Store()
    for i in range(4):
        with store.transaction() as txn:
            txn.log("x", "UPDATE", f"change {i}")
    log_ids = [r.log_id for r in store.all("log")]
    assert log_ids == sorted(log_ids) == [1, 2, 3, 4]
    with pytest.raises(errors.ValidationError):
        with store.transaction() as txn:
            txn.delete("log", 1)


def test_fault_injection():
    store = Store()
    store.fail_next_commit()
    with pytest.raises(errors.StorageFailure):
        _put_group(store, "5000000009")
    assert store.get("group", "5000000009") is None
    _put_group(store, "5000000009")  # next commit succeeds
    assert store.get("group", "5000000009") is not None
