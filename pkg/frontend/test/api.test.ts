// ApiClient request shapes, bearer header handling, and error mapping.
import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function fakeFetch(
  responder: (url: string, init?: RequestInit) => { status: number; body: unknown },
) {
  const calls: Recorded[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const { status, body } = responder(url, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { calls, fetchFn };
}

describe("ApiClient", () => {
  it("stores the token and sends it as a bearer header", async () => {
    const { calls, fetchFn } = fakeFetch((url) =>
      url.endsWith("/v1/auth/login")
        ? { status: 200, body: { token: "tok123" } }
        : { status: 200, body: { documents: [] } },
    );
    const client = new ApiClient("http://svc", fetchFn);
    await client.login("u1", "pw");
    expect(client.authenticated).toBe(true);
    await client.listDocuments();
    const headers = calls[1].init?.headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer tok123");
  });

  it("maps error bodies to ApiError", async () => {
    const { fetchFn } = fakeFetch(() => ({
      status: 409,
      body: { error_code: "field_hidden", message: "hidden under context" },
    }));
    const client = new ApiClient("http://svc", fetchFn);
    await expect(client.suggest({ label_text: "SSN" }, {})).rejects.toThrowError(
      ApiError,
    );
    await client.suggest({ label_text: "SSN" }, {}).catch((error: ApiError) => {
      expect(error.status).toBe(409);
      expect(error.errorCode).toBe("field_hidden");
    });
  });

  it("sends the suggest payload shape the service expects", async () => {
    const { calls, fetchFn } = fakeFetch(() => ({
      status: 200,
      body: { status: "NoData", candidates: [], field_id: null },
    }));
    const client = new ApiClient("", fetchFn);
    await client.suggest({ label_text: "GPA" }, { "user.profile.us_citizen": "Yes" });
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body).toEqual({
      field: { label_text: "GPA" },
      form_context: { values: { "user.profile.us_citizen": "Yes" } },
    });
  });

  it("edit posts selection and instruction", async () => {
    const { calls, fetchFn } = fakeFetch(() => ({
      status: 200,
      body: { original: "a", revised_text: "a", diff: [{ op: "keep", text: "a" }] },
    }));
    const client = new ApiClient("", fetchFn);
    const response = await client.edit("a", "shorten");
    expect(response.revised_text).toBe("a");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      selected_text: "a",
      instruction: "shorten",
    });
  });
});
