import { describe, expect, it } from "vitest";

import { AuthStore } from "../src/auth.js";
import { ApiClient } from "../src/client.js";
import type { Envelope } from "../src/types.js";

function clientWith(script: [number, Envelope][]) {
  return new ApiClient("http://x", async () => {
    const next = script.shift();
    if (!next) throw new Error("fetch script exhausted");
    return new Response(JSON.stringify(next[1]), { status: next[0] });
  });
}

const SESSION = {
  token: "tok-7", user_id: "2000000005", user_code: "member",
  level: 0, effective_mask: 15, must_change_password: false,
};

describe("AuthStore", () => {
  it("stores the session and token on a successful login", async () => {
    const client = clientWith([[200, { status: "ok", payload: SESSION }]]);
    const auth = new AuthStore(client);
    expect(await auth.login("member", "pw")).toBe("authenticated");
    expect(auth.session?.user_code).toBe("member");
    expect(client.token).toBe("tok-7");
  });

  it("moves to the challenge state and keeps the question", async () => {
    const client = clientWith([[401, {
      status: "error", error_code: "ChallengeRequired",
      detail: "answer required", context: { question: "What is 3 + 4?" },
    }]]);
    const auth = new AuthStore(client);
    expect(await auth.login("member", "pw")).toBe("challenge");
    expect(auth.challengeQuestion).toBe("What is 3 + 4?");
    expect(client.token).toBeNull();
  });

  it("moves to locked on AccountLocked", async () => {
    const client = clientWith([[423, {
      status: "error", error_code: "AccountLocked", detail: "locked",
    }]]);
    const auth = new AuthStore(client);
    expect(await auth.login("member", "pw")).toBe("locked");
    expect(auth.lastError).toContain("administrator");
  });

  it("keeps the error message on plain bad credentials", async () => {
    const client = clientWith([[401, {
      status: "error", error_code: "InvalidCredentials", detail: "bad password",
    }]]);
    const auth = new AuthStore(client);
    expect(await auth.login("member", "nope")).toBe("anonymous");
    expect(auth.lastError).toBe("bad password");
  });

  it("logout clears the token and returns to anonymous", async () => {
    const client = clientWith([
      [200, { status: "ok", payload: SESSION }],
      [200, { status: "ok", payload: null }],
    ]);
    const auth = new AuthStore(client);
    await auth.login("member", "pw");
    await auth.logout();
    expect(auth.state).toBe("anonymous");
    expect(client.token).toBeNull();
    expect(auth.session).toBeNull();
  });
});
