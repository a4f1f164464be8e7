import { describe, expect, it } from "vitest";

import { renderMenu, visibleMenu } from "../src/menu.js";

const NONE = {
  view_assets: false, manage_assets: false, submit_request: false,
  approve_requests: false, manage_users: false, create_department: false,
  create_faculty: false, add_location: false, audit: false, reports: false,
  backup: false, bulk_import: false, error_management: false,
};

describe("welcome menu", () => {
  it("always shows the profile entry", () => {
    const ids = visibleMenu(NONE).map((m) => m.id);
    expect(ids).toEqual(["profile"]);
  });

  it("shows an entry when any of its capabilities is granted", () => {
    const ids = visibleMenu({ ...NONE, add_location: true }).map((m) => m.id);
    expect(ids).toContain("organization");
  });

  it("hides approver screens from a plain member", () => {
    const caps = { ...NONE, view_assets: true, submit_request: true };
    const ids = visibleMenu(caps).map((m) => m.id);
    expect(ids).toContain("search");
    expect(ids).toContain("submit-request");
    expect(ids).not.toContain("pending");
    expect(ids).not.toContain("backup");
  });

  it("renders a numbered list", () => {
    const text = renderMenu({ ...NONE, view_assets: true });
    expect(text.split("\n")).toEqual([
      "1. Search the catalog",
      "2. My assets",
      "3. My profile",
    ]);
  });
});
