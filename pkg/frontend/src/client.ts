/**
 * Typed HTTP client for the inventory gateway.
 *
 * Every response arrives in the same JSON envelope. Failures become
 * ApiError (carrying the server's stable error code); 202 "confirm"
 * responses are either surfaced as a PendingConfirmation for the caller's
 * dialog, or resolved automatically by `callConfirmed` once the user has
 * agreed. Each round-trip is appended to `trace` so flows can be audited
 * (and tested) for protocol conformance.
 */

import type { Envelope } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly detail: string,
    readonly httpStatus: number,
    readonly context: Record<string, unknown> = {},
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

/** A 202 first-phase response: show `preview`, then redeem `token`. */
export interface PendingConfirmation {
  token: string;
  preview: string;
}

export interface TraceEntry {
  method: string;
  path: string;
  httpStatus: number;
  phase: "plain" | "confirm-requested" | "confirm-redeemed";
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  token: string | null = null;
  readonly trace: TraceEntry[] = [];

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private headers(): Record<string, string> {
    const h: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async roundTrip<T>(
    method: string,
    path: string,
    body: unknown,
    params: Record<string, string> | undefined,
    phase: TraceEntry["phase"],
  ): Promise<{ envelope: Envelope<T>; httpStatus: number }> {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    const resp = await this.fetchFn(`${this.baseUrl}${path}${query}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const envelope = (await resp.json()) as Envelope<T>;
    this.trace.push({
      method,
      path,
      httpStatus: resp.status,
      phase: resp.status === 202 ? "confirm-requested" : phase,
    });
    if (envelope.status === "error") {
      throw new ApiError(
        envelope.error_code ?? "UnknownError",
        envelope.detail ?? "",
        resp.status,
        envelope.context ?? {},
      );
    }
    return { envelope, httpStatus: resp.status };
  }

  /** Single request; a 202 confirm response is returned, not auto-redeemed. */
  async call<T>(
    method: string,
    path: string,
    body?: unknown,
    params?: Record<string, string>,
  ): Promise<T | PendingConfirmation> {
    const { envelope, httpStatus } = await this.roundTrip<T>(
      method, path, body, params, "plain");
    if (httpStatus === 202 && envelope.status === "confirm") {
      return {
        token: envelope.confirmation_token ?? "",
        preview: envelope.preview ?? "",
      };
    }
    return envelope.payload as T;
  }

  static isPending(value: unknown): value is PendingConfirmation {
    return (
      typeof value === "object" &&
      value !== null &&
      "token" in value &&
      "preview" in value
    );
  }

  /**
   * Two-phase call: request, let `decide` inspect the consequence preview,
   * and redeem the one-shot token when it returns true.
   */
  async callConfirmed<T>(
    method: string,
    path: string,
    body: Record<string, unknown>,
    decide: (preview: string) => boolean | Promise<boolean> = () => true,
  ): Promise<T | null> {
    const first = await this.call<T>(method, path, body);
    if (!ApiClient.isPending(first)) return first as T;
    if (!(await decide(first.preview))) return null;
    const { envelope } = await this.roundTrip<T>(
      method, path, { ...body, confirm_token: first.token }, undefined,
      "confirm-redeemed");
    return envelope.payload as T;
  }

  get<T>(path: string, params?: Record<string, string>): Promise<T> {
    return this.call<T>("GET", path, undefined, params) as Promise<T>;
  }

  post<T>(path: string, body?: unknown): Promise<T> {
    return this.call<T>("POST", path, body) as Promise<T>;
  }
}
