/**
 * Login-screen state machine.
 *
 * Tracks the four states the form can be in: anonymous, waiting on the
 * arithmetic challenge, locked out, or signed in. The session token lives
 * only in the ApiClient (memory), never in storage.
 */

import { ApiClient, ApiError } from "./client.js";
import type { Capabilities, SessionInfo } from "./types.js";

export type AuthState = "anonymous" | "challenge" | "locked" | "authenticated";

export class AuthStore {
  state: AuthState = "anonymous";
  session: SessionInfo | null = null;
  challengeQuestion: string | null = null;
  lastError: string | null = null;

  constructor(private readonly client: ApiClient) {}

  async login(
    userCode: string,
    password: string,
    challengeAnswer?: string,
  ): Promise<AuthState> {
    this.lastError = null;
    try {
      const session = await this.client.post<SessionInfo>("/auth/login", {
        user_code: userCode,
        password,
        challenge_answer: challengeAnswer ?? null,
      });
      this.session = session;
      this.client.token = session.token;
      this.state = "authenticated";
      this.challengeQuestion = null;
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      if (err.code === "ChallengeRequired") {
        this.state = "challenge";
        this.challengeQuestion = String(err.context["question"] ?? "");
      } else if (err.code === "AccountLocked") {
        this.state = "locked";
        this.lastError = "Account locked; ask an administrator to unlock it.";
      } else {
        this.lastError = err.detail;
        if (this.state !== "challenge") this.state = "anonymous";
      }
    }
    return this.state;
  }

  async logout(): Promise<void> {
    if (this.state !== "authenticated") return;
    await this.client.post("/auth/logout");
    this.client.token = null;
    this.session = null;
    this.state = "anonymous";
  }

  async capabilities(): Promise<Capabilities> {
    return this.client.get<Capabilities>("/capabilities");
  }

  /** Admin action: clear another account's failed-attempt counter. */
  async unlockUser(userCode: string): Promise<void> {
    await this.client.post("/auth/unlock", { user_code: userCode });
  }

  async changePassword(
    oldPassword: string,
    newPassword: string,
    repeat: string,
  ): Promise<void> {
    await this.client.post("/auth/password", {
      old_password: oldPassword,
      new_password: newPassword,
      new_password_repeat: repeat,
    });
    if (this.session) this.session.must_change_password = false;
  }
}
