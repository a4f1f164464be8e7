import csv
import io

import pytest

from uuis import errors
from uuis.audit import ReportSpec


@pytest.fixture
def traced(world):
    world.add_user("tech", 1, "1110000001")
    world.add_user("chair", 2, "1110000001")
    world.add_user("histech", 1, "1220000001")
    world.item = world.add_item("TR1", world.users["tech"].user_id,
                                world.locations["1110000001"].loc_id)
    return world


class TestAppendLog:
    def test_one_record_per_mutation(self, svc, traced):
        session = traced.login("tech")
        before = len(svc.store.all("log"))
        svc.assets.update_assets(session, {traced.item.item_id},
                                 {"item_description": "renamed"})
        assert len(svc.store.all("log")) == before + 1

    def test_monotonic_ids(self, svc, traced):
        session = traced.login("tech")
        svc.assets.update_assets(session, {traced.item.item_id},
                                 {"item_description": "a"})
        svc.assets.update_assets(session, {traced.item.item_id},
                                 {"item_description": "b"})
        ids = [r.log_id for r in svc.store.all("log")]
        assert ids == sorted(ids) and len(set(ids)) == len(ids)

    def test_read_only_writes_nothing(self, svc, traced):
        session = traced.login("tech")
        before = len(svc.store.all("log"))
        svc.assets.view_assets(session)
        svc.search.simple_search(session, "TR1")
        assert len(svc.store.all("log")) == before


class TestAuditBrowsing:
    def test_level3_gets_all_categories(self, svc, traced, admin):
        assert svc.audit.audit_options(admin) == [
            "asset", "time", "user", "department", "faculty"]

    def test_level1_subset(self, svc, traced):
        options = svc.audit.audit_options(traced.login("tech"))
        assert "faculty" not in options and "department" in options

    def test_no_audit_bit_denied(self, svc, traced):
        traced.add_user("plain", 0, "1110000001")
        with pytest.raises(errors.PermissionDenied):
            svc.audit.audit_options(traced.login("plain"))

    def test_asset_history_summarized(self, svc, traced, admin):
        session = traced.login("tech")
        for dest in ("1110000002", "1110000001", "1110000002"):
            svc.assets.update_assets(session, {traced.item.item_id},
                                     {"loc_id": traced.locations[dest].loc_id})
        summaries = svc.audit.audit_logs(admin, "asset", traced.item.item_id)
        assert len(summaries) == 1
        assert summaries[0].event_count == 3
        assert len(summaries[0].records) == 3  # drill-down expands each record

    def test_empty_time_range(self, svc, traced, admin):
        assert svc.audit.audit_logs(
            admin, "time", ("2030-01-01T00:00:00+00:00",
                            "2030-01-02T00:00:00+00:00")) == []

    def test_out_of_scope_subject_denied(self, svc, traced):
        session = traced.login("histech")  # other-faculty auditor
        with pytest.raises(errors.PermissionDenied):
            svc.audit.audit_logs(session, "asset", traced.item.item_id)

    def test_department_scope_denied_cross_faculty(self, svc, traced):
        with pytest.raises(errors.PermissionDenied):
            svc.audit.audit_logs(traced.login("histech"), "department",
                                 "1110000001")

    def test_unknown_key(self, svc, traced, admin):
        with pytest.raises(errors.UnknownKey):
            svc.audit.audit_logs(admin, "asset", "4999999999")


class TestReports:
    def test_assets_by_location(self, svc, traced, admin):
        traced.add_item("TR2", traced.users["tech"].user_id,
                        traced.locations["1110000001"].loc_id)
        traced.add_item("TR3", traced.users["tech"].user_id,
                        traced.locations["1110000002"].loc_id)
        rows = svc.audit.produce_report(admin, ReportSpec(category="assets"))
        by_loc = {r["loc_id"]: r["item_count"] for r in rows}
        assert by_loc[traced.locations["1110000001"].loc_id] == 2
        assert by_loc[traced.locations["1110000002"].loc_id] == 1

    def test_empty_selection_reports_everything_visible(self, svc, traced, admin):
        rows = svc.audit.produce_report(
            admin, ReportSpec(category="assets", item_ids=set()))
        assert sum(r["item_count"] for r in rows) == len(svc.store.all("item"))

    def test_invisible_scope_raises(self, svc, traced):
        session = traced.login("chair")
        spec = ReportSpec(category="users")
        rows = svc.audit.produce_report(session, spec)
        assert all(r["affln_id"].startswith("111") for r in rows)
        hist = traced.login("histech")
        with pytest.raises((errors.NoVisibleData, errors.PermissionDenied)):
            svc.audit.produce_report(hist, ReportSpec(category="users"))


class TestExport:
    def test_csv_shape(self, svc, traced, admin):
        rows = [{"a": 1, "b": "x"}, {"a": 2, "b": "y"}]
        data = svc.audit.export_view(admin, rows, "csv")
        parsed = list(csv.reader(io.StringIO(data.decode())))
        assert parsed == [["a", "b"], ["1", "x"], ["2", "y"]]

    def test_deterministic(self, svc, traced, admin):
        rows = svc.audit.produce_report(admin, ReportSpec(category="assets"))
        assert svc.audit.export_view(admin, rows) == svc.audit.export_view(admin, rows)

    def test_unknown_format(self, svc, admin):
        with pytest.raises(errors.UnknownFormat):
            svc.audit.export_view(admin, [{"a": 1}], "pdf")

    def test_csv_reimport_round_trip(self, svc, traced, admin):
        rows = svc.audit.produce_report(admin, ReportSpec(category="assets"))
        data = svc.audit.export_view(admin, rows, "csv")
        parsed = list(csv.reader(io.StringIO(data.decode())))
        header, body = parsed[0], parsed[1:]
        rebuilt = [dict(zip(header, line)) for line in body]
        assert [[str(v) for v in r.values()] for r in rows] == \
            [list(r.values()) for r in rebuilt]

    def test_text_format(self, svc, admin):
        data = svc.audit.export_view(admin, [{"col": "val"}], "text")
        assert b"col" in data and b"val" in data


class TestErrors:
    def test_capture_filter_annotate(self, svc, traced, admin):
        svc.audit.record_error("error", "database write failed", context="op=x")
        svc.audit.record_error("warning", "slow query")
        errs = svc.audit.list_errors(admin, severity="error")
        assert len(errs) == 1 and errs[0].message == "database write failed"
        updated = svc.audit.annotate_error(admin, errs[0].error_id, "retried, ok")
        updated = svc.audit.annotate_error(admin, updated.error_id, "closing")
        assert "retried, ok" in updated.annotations
        assert updated.annotations.index("retried") < updated.annotations.index("closing")

    def test_non_admin_denied(self, svc, traced):
        with pytest.raises(errors.PermissionDenied):
            svc.audit.list_errors(traced.login("tech"))

    def test_unknown_error_id(self, svc, admin):
        with pytest.raises(errors.UnknownError):
            svc.audit.annotate_error(admin, 999, "x")
