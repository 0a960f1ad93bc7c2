// Thin typed client for the prepub REST API. The UI performs no
// computation the API does not expose; every state change goes through
// these calls and waits for the response (no optimistic updates).

import type { FragmentAnchor } from "./anchor";

export interface Item {
  handle: string;
  title: string;
  kind: string;
  abstract: string | null;
  fulltext: string | null;
  author_names: string[];
  archive_code: string;
}

export interface OutputRecord {
  output_id: string;
  kind: "comment" | "assertion" | "quotation" | "micropaper" | "relationship";
  creator: string;
  created_at: number;
  visibility: "public" | "private";
  version: number;
  supersedes: string | null;
  anchor?: FragmentAnchor;
  base_anchor?: FragmentAnchor;
  body?: string;
  comment?: string | null;
  title?: string;
  statement?: { subject: string; predicate: string; object: string };
  from_ref?: { kind: string; id: string };
  to_ref?: { kind: string; id: string };
  relation?: string;
}

export interface Notification {
  notification_id: string;
  recipient: string;
  event_id: number;
  state: "pending" | "delivered" | "read";
  delivered_via: "inbox" | "webhook";
}

export interface ThreadMessage {
  author: string;
  body: string;
  at: number;
  attached_output: string | null;
}

export interface Thread {
  thread_id: string;
  origin_event: number;
  origin_notification: string;
  participants: string[];
  messages: ThreadMessage[];
  visibility: "public" | "private";
}

export interface Portrait {
  person_id: string;
  created_counts: Record<string, number>;
  received_usage_count: number;
  notifications_responded: number;
  notifications_received: number;
  threads_joined: number;
  offers_made: number;
  computed_at: number;
  private_created_counts?: Record<string, number>;
}

export interface NeighborReport {
  person_id: string;
  upstream: { person_id: string; usage_count: number }[];
  downstream: { person_id: string; usage_count: number }[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    public base: string,
    public token: string | null = null,
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await fetch(`${this.base}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = `http-${response.status}`;
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { error?: string; detail?: string };
        code = parsed.error ?? code;
        detail = parsed.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, code, detail);
    }
    return response.json();
  }

  whoami() {
    return this.request("GET", "/whoami") as Promise<{ person_id: string }>;
  }

  listItems(limit = 100, offset = 0) {
    return this.request("GET", `/items?limit=${limit}&offset=${offset}`) as Promise<Item[]>;
  }

  getItem(handle: string) {
    return this.request("GET", `/items/${encodeURIComponent(handle)}`) as Promise<Item>;
  }

  itemOutputs(handle: string) {
    return this.request("GET", `/items/${encodeURIComponent(handle)}/outputs`) as Promise<
      OutputRecord[]
    >;
  }

  createOutput(payload: Record<string, unknown>) {
    return this.request("POST", "/outputs", payload) as Promise<OutputRecord>;
  }

  notifications(state?: string) {
    const query = state ? `?state=${encodeURIComponent(state)}` : "";
    return this.request("GET", `/notifications${query}`) as Promise<Notification[]>;
  }

  markRead(notificationId: string) {
    return this.request("POST", `/notifications/${notificationId}/read`, {}) as Promise<Notification>;
  }

  openThread(notificationId: string, message: string, visibility: "public" | "private" = "public") {
    return this.request("POST", "/threads", {
      notification_id: notificationId,
      message,
      visibility,
    }) as Promise<Thread>;
  }

  myThreads() {
    return this.request("GET", "/threads") as Promise<Thread[]>;
  }

  getThread(threadId: string) {
    return this.request("GET", `/threads/${threadId}`) as Promise<Thread>;
  }

  postMessage(threadId: string, body: string, attachedOutput?: string) {
    return this.request("POST", `/threads/${threadId}/messages`, {
      body,
      attached_output: attachedOutput ?? null,
    }) as Promise<Thread>;
  }

  submitOffer(threadId: string, offered: { kind: string; id: string }, note: string) {
    return this.request("POST", `/threads/${threadId}/offers`, { offered, note });
  }

  portrait(personId: string) {
    return this.request("GET", `/persons/${personId}/portrait`) as Promise<Portrait>;
  }

  neighbors(personId: string, max = 20) {
    return this.request("GET", `/persons/${personId}/neighbors?max=${max}`) as Promise<NeighborReport>;
  }
}
