/**
 * Request screens: submission with the confirmation dialog, the requester's
 * status list with cancellation, and the approver's pending queue with
 * formalize/approve/reject.
 *
 * Every state change goes through `callConfirmed`, so the confirmation
 * dialog (the `decide` callback) is a structural part of each flow.
 */

import { ApiClient } from "./client.js";
import type { NotificationRow, RequestRow } from "./types.js";

export type ConfirmDialog = (preview: string) => boolean | Promise<boolean>;

export class RequestsView {
  mine: RequestRow[] = [];
  pending: RequestRow[] = [];

  constructor(
    private readonly client: ApiClient,
    /** dialog shown before any request state change; default accepts */
    private readonly confirmDialog: ConfirmDialog = () => true,
  ) {}

  async submit(
    reqType: string,
    description: string,
    target?: string,
  ): Promise<RequestRow | null> {
    return this.client.callConfirmed<RequestRow>(
      "POST",
      "/requests",
      { req_type: reqType, description, target: target ?? null },
      this.confirmDialog,
    );
  }

  async refreshMine(): Promise<RequestRow[]> {
    this.mine = await this.client.get<RequestRow[]>("/requests");
    return this.mine;
  }

  async cancel(reqIds: string[]): Promise<RequestRow[] | null> {
    const result = await this.client.callConfirmed<RequestRow[]>(
      "POST",
      "/requests/cancel",
      { req_ids: reqIds },
      this.confirmDialog,
    );
    if (result) await this.refreshMine();
    return result;
  }

  async refreshPending(): Promise<RequestRow[]> {
    this.pending = await this.client.get<RequestRow[]>("/requests/pending");
    return this.pending;
  }

  /**
   * Approve with an optional formalization (e.g. the destination of a
   * transfer). Missing mandatory fields surface as an ApiError with code
   * MissingFields, which the screen shows inline next to the form.
   */
  async approve(
    reqId: string,
    formalization: Record<string, string> = {},
  ): Promise<RequestRow | null> {
    const result = await this.client.callConfirmed<RequestRow>(
      "POST",
      `/requests/${reqId}/approve`,
      { formalization },
      this.confirmDialog,
    );
    if (result) await this.refreshPending();
    return result;
  }

  async reject(reqId: string, comment = ""): Promise<RequestRow | null> {
    const result = await this.client.callConfirmed<RequestRow>(
      "POST",
      `/requests/${reqId}/reject`,
      { comment },
      this.confirmDialog,
    );
    if (result) await this.refreshPending();
    return result;
  }

  async notifications(): Promise<NotificationRow[]> {
    return this.client.get<NotificationRow[]>("/notifications");
  }
}
