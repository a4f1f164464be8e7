/** Profile screen: view and edit the signed-in user's contact fields. */

import { ApiClient } from "./client.js";
import type { ProfileRow } from "./types.js";

export const EDITABLE_FIELDS = [
  "email",
  "phone",
  "mobile",
  "street_address",
] as const;

export type EditableField = (typeof EDITABLE_FIELDS)[number];

export class ProfileView {
  profile: ProfileRow | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly userId: string,
  ) {}

  async load(): Promise<ProfileRow> {
    this.profile = await this.client.get<ProfileRow>(
      `/users/${this.userId}/profile`,
    );
    return this.profile;
  }

  async save(edits: Partial<Record<EditableField, string>>): Promise<ProfileRow> {
    this.profile = (await this.client.call<ProfileRow>(
      "PATCH",
      `/users/${this.userId}/profile`,
      { edits },
    )) as ProfileRow;
    return this.profile;
  }
}
