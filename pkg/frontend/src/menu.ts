/** Welcome-screen option menu, filtered by the account's capabilities. */

import type { Capabilities } from "./types.js";

export interface MenuItem {
  id: string;
  label: string;
  /** capability keys, any of which makes the entry visible */
  needs: string[];
}

export const MENU: MenuItem[] = [
  { id: "search", label: "Search the catalog", needs: ["view_assets"] },
  { id: "assets", label: "My assets", needs: ["view_assets"] },
  { id: "manage-assets", label: "Manage assets", needs: ["manage_assets"] },
  { id: "submit-request", label: "Submit a request", needs: ["submit_request"] },
  { id: "my-requests", label: "My requests", needs: ["submit_request"] },
  { id: "pending", label: "Pending approvals", needs: ["approve_requests"] },
  { id: "users", label: "User administration", needs: ["manage_users"] },
  {
    id: "organization",
    label: "Organization structure",
    needs: ["create_department", "create_faculty", "add_location"],
  },
  { id: "audit", label: "Audit log", needs: ["audit"] },
  { id: "reports", label: "Reports", needs: ["reports"] },
  { id: "backup", label: "Backup", needs: ["backup"] },
  { id: "import", label: "Bulk import", needs: ["bulk_import"] },
  { id: "errors", label: "Error messages", needs: ["error_management"] },
  { id: "profile", label: "My profile", needs: [] },
];

export function visibleMenu(caps: Capabilities): MenuItem[] {
  return MENU.filter(
    (item) => item.needs.length === 0 || item.needs.some((c) => caps[c]),
  );
}

/** Plain-text rendering used by the welcome screen (and its tests). */
export function renderMenu(caps: Capabilities): string {
  return visibleMenu(caps)
    .map((item, n) => `${n + 1}. ${item.label}`)
    .join("\n");
}
