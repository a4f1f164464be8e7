/** Wire types shared with the HTTP gateway. */

export interface Envelope<T = unknown> {
  status: "ok" | "error" | "confirm";
  payload?: T;
  error_code?: string;
  detail?: string;
  context?: Record<string, unknown>;
  confirmation_token?: string;
  preview?: string;
}

export interface SessionInfo {
  token: string;
  user_id: string;
  user_code: string;
  level: number;
  effective_mask: number;
  must_change_password: boolean;
}

export type Capabilities = Record<string, boolean>;

export interface ItemRow {
  item_id: string;
  item_description: string;
  code: string;
  serial_number: string;
  cat_id: string;
  owner_id: string;
  loc_id: string;
  status: string;
  group_id?: string | null;
  [key: string]: unknown;
}

export interface RequestRow {
  req_id: string;
  requester: string;
  req_type: string;
  submitted_by: string;
  description: string;
  status: string;
  escalated_to: number;
  comment: string;
  item_id?: string | null;
  date_submitted: string;
  [key: string]: unknown;
}

export interface NotificationRow {
  note_id: number;
  req_id: string;
  text: string;
  created_at: string;
}

export interface ProfileRow {
  user_id: string;
  email: string;
  phone: string;
  mobile: string;
  street_address: string;
  dob: string;
  [key: string]: unknown;
}
