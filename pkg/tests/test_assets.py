import random

import pytest

from uuis import errors



@pytest.fixture
def shop(world):
    world.add_user("tech", 1, "1110000001")
    world.add_user("chair", 2, "1110000001")
    world.add_user("member", 0, "1110000001")
    world.items = [
        world.add_item(f"IT{i}", world.users["tech"].user_id,
                       world.locations["1110000001"].loc_id)
        for i in range(8)
    ]
    return world


class TestViewAssets:
    def test_department_scope(self, svc, world):
        world.add_user("phytech", 1, "1110000001")
        world.add_user("histech", 1, "1220000001")
        phy_item = world.add_item("P1", world.users["phytech"].user_id,
                                  world.locations["1110000001"].loc_id)
        his_item = world.add_item("H1", world.users["histech"].user_id,
                                  world.locations["1220000001"].loc_id)
        visible = svc.assets.view_assets(world.login("phytech"))
        codes = {i.code for i in visible}
        assert phy_item.code in codes and his_item.code not in codes

    def test_mask_zero_sees_nothing(self, svc, world):
        world.add_user("ghost", 0, "1110000001", mask=0)
        assert svc.assets.view_assets(world.login("ghost")) == []

    def test_level3_sees_all(self, svc, shop, admin):
        assert len(svc.assets.view_assets(admin)) == len(shop.items)

    def test_filters(self, svc, shop):
        session = shop.login("tech")
        got = svc.assets.view_assets(session, {"code": "IT3"})
        assert [i.code for i in got] == ["IT3"]
        with pytest.raises(errors.ValidationError):
            svc.assets.view_assets(session, {"nope": "x"})


class TestAddAsset:
    def _fields(self, svc, world, **over):
        snap = svc.store.snapshot()
        cat = next(c for c in snap.all("cat") if c.parent_cat_id != "0")
        fields = dict(item_description="laptop", code="LT1", serial_number="S-1",
                      cat_id=cat.cat_id, owner_id=world.users["tech"].user_id,
                      loc_id=world.locations["1110000001"].loc_id)
        fields.update(over)
        return fields

    def test_creates_item_and_inventory(self, svc, shop):
        session = shop.login("tech")
        item = svc.assets.add_asset(session, self._fields(svc, shop))
        assert item.item_id.startswith("4")
        entry = svc.store.get("inv", item.item_id)
        assert (entry.qty, entry.status) == (1, "Available")

    def test_duplicate_serial(self, svc, shop):
        session = shop.login("tech")
        svc.assets.add_asset(session, self._fields(svc, shop))
        with pytest.raises(errors.DuplicateSerial):
            svc.assets.add_asset(session, self._fields(svc, shop, code="LT2"))

    def test_wrong_category_property(self, svc, shop):
        session = shop.login("tech")
        with pytest.raises(errors.UnknownReference):
            svc.assets.add_asset(session, self._fields(svc, shop),
                                 properties=[("5999999999", "x")])

    def test_member_cannot_add(self, svc, shop):
        with pytest.raises(errors.PermissionDenied):
            svc.assets.add_asset(shop.login("member"), self._fields(svc, shop))


class TestUpdateAssets:
    def test_move_two_items(self, svc, shop):
        session = shop.login("tech")
        dest = shop.locations["1110000002"].loc_id
        targets = {shop.items[0].item_id, shop.items[1].item_id}
        before = len(svc.store.all("log"))
        updated = svc.assets.update_assets(session, targets, {"loc_id": dest})
        assert all(i.loc_id == dest for i in updated)
        assert len(svc.store.all("log")) == before + 2

    def test_empty_selection(self, svc, shop):
        with pytest.raises(errors.EmptySelection):
            svc.assets.update_assets(shop.login("tech"), set(), {"status": "Retired"})

    def test_duplicate_serial_is_atomic(self, svc, shop):
        session = shop.login("tech")
        target = shop.items[0]
        with pytest.raises(errors.ValidationError):
            svc.assets.update_assets(session, {target.item_id},
                                     {"serial_number": "SN-IT1"})
        assert svc.store.get("item", target.item_id).serial_number == "SN-IT0"


class TestBulkAddAssets:
    HEADER = "item_description,code,serial_number,cat_code,owner_id,loc_code\n"

    def _row(self, world, n):
        return (f"bulk item {n},BK{n},SNB{n},GENERAL,"
                f"{world.users['tech'].user_id},LOC-0001\n")

    def test_five_valid_rows(self, svc, shop):
        csv_text = self.HEADER + "".join(self._row(shop, n) for n in range(5))
        report = svc.assets.bulk_add_assets(shop.login("tech"), csv_text)
        assert report.created == 5
        assert len(report.created_ids) == 5

    def test_wrong_arity_rejects_whole_file(self, svc, shop):
        csv_text = self.HEADER + self._row(shop, 0) + "too,few,columns\n"
        before = svc.store.snapshot().count("item")
        with pytest.raises(errors.RowFormatError):
            svc.assets.bulk_add_assets(shop.login("tech"), csv_text)
        assert svc.store.snapshot().count("item") == before

    def test_header_only_file(self, svc, shop):
        report = svc.assets.bulk_add_assets(shop.login("tech"), self.HEADER)
        assert report.created == 0

    def test_bad_header(self, svc, shop):
        with pytest.raises(errors.MalformedHeader):
            svc.assets.bulk_add_assets(shop.login("tech"),
                                       "a,b,c\n1,2,3\n")


class TestCheckout:
    def test_checkout_to_zero_flips_status(self, svc, shop):
        session = shop.login("tech")
        item_id = shop.items[0].item_id
        entry = svc.assets.checkout_item(session, item_id)
        assert (entry.qty, entry.status) == (0, "CheckedOut")
        with pytest.raises(errors.NotAvailable):
            svc.assets.checkout_item(session, item_id)

    def test_return_restores(self, svc, shop):
        session = shop.login("tech")
        item_id = shop.items[0].item_id
        svc.assets.checkout_item(session, item_id)
        entry = svc.assets.return_item(session, item_id)
        assert (entry.qty, entry.status) == (1, "Available")

    def test_return_without_checkout(self, svc, shop):
        with pytest.raises(errors.NotCheckedOut):
            svc.assets.return_item(shop.login("tech"), shop.items[0].item_id)


def partition_of(svc):
    """item_id -> group_id mapping for all grouped items."""
    groups = {}
    for item in svc.store.all("item"):
        if item.group_id:
            groups.setdefault(item.group_id, set()).add(item.item_id)
    return groups


class TestGrouping:
    def test_main_case_new_group(self, svc, shop):
        session = shop.login("tech")
        a, b = shop.items[0].item_id, shop.items[1].item_id
        outcome = svc.assets.group_assets(session, {a, b})
        assert outcome.action.resolution == "CreateGroup"
        assert partition_of(svc) == {outcome.group_id: {a, b}}

    def test_exc1_already_grouped(self, svc, shop):
        session = shop.login("tech")
        a, b = shop.items[0].item_id, shop.items[1].item_id
        svc.assets.group_assets(session, {a, b})
        with pytest.raises(errors.AlreadyGrouped):
            svc.assets.group_assets(session, {a, b})

    def test_exc2_shrink_with_confirm(self, svc, shop):
        session = shop.login("tech")
        a, b, c = (shop.items[i].item_id for i in range(3))
        g = svc.assets.group_assets(session, {a, b, c}).group_id
        with pytest.raises(errors.ConfirmationRequired):
            svc.assets.group_assets(session, {a, b})
        svc.assets.group_assets(session, {a, b}, confirm=True)
        assert partition_of(svc) == {g: {a, b}}

    def test_exc3_hidden_member_refused(self, svc, shop, world, admin):
        # group spans two departments; the dept-1 tech cannot see the dept-3 item
        world.add_user("histech", 1, "1220000001")
        hidden = world.add_item("HID", world.users["histech"].user_id,
                                world.locations["1220000001"].loc_id)
        a, b = shop.items[0].item_id, shop.items[1].item_id
        svc.assets.group_assets(admin, {a, b, hidden.item_id})
        session = shop.login("tech")
        with pytest.raises(errors.RefuseHidden):
            svc.assets.group_assets(session, {a, b})

    def test_exc4_merge_whole_groups(self, svc, shop):
        session = shop.login("tech")
        ids = [i.item_id for i in shop.items]
        g1 = svc.assets.group_assets(session, {ids[0], ids[1]}).group_id
        g2 = svc.assets.group_assets(session, {ids[2], ids[3]}).group_id
        with pytest.raises(errors.ConfirmationRequired):
            svc.assets.group_assets(session, set(ids[:4]))
        outcome = svc.assets.group_assets(session, set(ids[:4]), confirm=True)
        assert outcome.action.resolution == "MergeGroups"
        assert partition_of(svc) == {outcome.group_id: set(ids[:4])}

    def test_exc5_split_and_regroup(self, svc, shop):
        session = shop.login("tech")
        ids = [i.item_id for i in shop.items]
        g1 = svc.assets.group_assets(session, {ids[0], ids[1], ids[2]}).group_id
        g2 = svc.assets.group_assets(session, {ids[3], ids[4]}).group_id
        outcome = svc.assets.group_assets(session, {ids[0], ids[3]}, confirm=True)
        assert outcome.action.resolution == "SplitAndRegroup"
        parts = partition_of(svc)
        assert parts[outcome.group_id] == {ids[0], ids[3]}
        assert parts[g1] == {ids[1], ids[2]}
        assert g2 not in parts  # left a singleton, dissolved

    def test_partition_invariant_random_sequences(self, svc, shop):
        session = shop.login("tech")
        rng = random.Random(7)
        ids = [i.item_id for i in shop.items]
        for _ in range(300):
            selection = set(rng.sample(ids, rng.randint(1, len(ids))))
            try:
                svc.assets.group_assets(session, selection, confirm=True)
            except (errors.AlreadyGrouped, errors.RefuseHidden,
                    errors.EmptySelection):
                pass
            parts = partition_of(svc)
            seen = set()
            for members in parts.values():
                assert len(members) >= 2
                assert not members & seen
                seen |= members
            # groups table mirrors the partition
            assert set(parts) == {g.group_id for g in svc.store.all("group")}
