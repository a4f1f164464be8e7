export { ApiClient, ApiError } from "./client.js";
export type { PendingConfirmation, TraceEntry } from "./client.js";
export { AuthStore } from "./auth.js";
export type { AuthState } from "./auth.js";
export { MENU, visibleMenu, renderMenu } from "./menu.js";
export type { MenuItem } from "./menu.js";
export { SearchView, toCsv } from "./search.js";
export { RequestsView } from "./requests.js";
export type { ConfirmDialog } from "./requests.js";
export { ProfileView, EDITABLE_FIELDS } from "./profile.js";
export type { EditableField } from "./profile.js";
export type {
  Envelope,
  SessionInfo,
  Capabilities,
  ItemRow,
  RequestRow,
  NotificationRow,
  ProfileRow,
} from "./types.js";
