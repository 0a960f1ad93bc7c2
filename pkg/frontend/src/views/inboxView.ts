// Notification inbox: poll the API (no push channel exists), list
// notifications newest first, mark read, open assistance threads.

import type { ApiClient, Notification } from "../api";
import { clear, el, message } from "../dom";

export interface InboxViewOptions {
  pollMs?: number; // default 5000
  onRendered?: (notifications: Notification[]) => void;
  onThreadOpened?: (threadId: string) => void;
}

export function inboxView(
  root: HTMLElement,
  api: ApiClient,
  options: InboxViewOptions = {},
): { stop: () => void; refresh: () => Promise<void> } {
  clear(root);
  root.append(el("h2", {}, "Inbox"));
  const list = el("ul", { class: "inbox", "data-testid": "inbox-list" });
  const counter = el("p", { "data-testid": "unread-count" }, "");
  root.append(counter, list);

  async function refresh(): Promise<void> {
    let notifications: Notification[];
    try {
      notifications = await api.notifications();
    } catch (error) {
      message(root, String(error), "error");
      return;
    }
    const unread = notifications.filter((n) => n.state !== "read").length;
    counter.textContent = `${unread} unread of ${notifications.length}`;
    clear(list);
    for (const notification of notifications) {
      const entry = el(
        "li",
        { "data-notification-id": notification.notification_id },
        el("span", { class: `state state-${notification.state}` }, notification.state),
        ` event #${notification.event_id} via ${notification.delivered_via} `,
      );
      const readButton = el("button", { "data-testid": "mark-read" }, "mark read");
      readButton.addEventListener("click", async () => {
        try {
          await api.markRead(notification.notification_id);
          await refresh();
        } catch (error) {
          message(root, String(error), "error");
        }
      });
      const openInput = el("input", {
        placeholder: "first message",
        "data-testid": "thread-message",
      });
      const openButton = el("button", { "data-testid": "open-thread" }, "open thread");
      openButton.addEventListener("click", async () => {
        try {
          const thread = await api.openThread(notification.notification_id, openInput.value);
          options.onThreadOpened?.(thread.thread_id);
        } catch (error) {
          message(root, String(error), "error");
        }
      });
      entry.append(readButton, openInput, openButton);
      list.append(entry);
    }
    options.onRendered?.(notifications);
  }

  void refresh();
  const timer = setInterval(() => void refresh(), options.pollMs ?? 5000);
  return {
    stop: () => clearInterval(timer),
    refresh,
  };
}
