// Shell: session token entry (kept in sessionStorage), a hash router and
// the page views. State lives server-side; this client only renders it.

import { ApiClient } from "./api";
import { clear, el, message } from "./dom";
import { inboxView } from "./views/inboxView";
import { itemView } from "./views/itemView";
import { neighborsView, portraitView } from "./views/portraitView";
import { threadView } from "./views/threadView";

const DEFAULT_BASE = "/api";

export function makeClient(): ApiClient {
  return new ApiClient(
    localStorage.getItem("prepub.base") ?? DEFAULT_BASE,
    sessionStorage.getItem("prepub.token"),
  );
}

export async function route(root: HTMLElement, api: ApiClient, hash: string): Promise<void> {
  const [, page, ...rest] = hash.split("/");
  const arg = decodeURIComponent(rest.join("/"));
  if (page === "item" && arg) {
    await itemView(root, api, arg);
  } else if (page === "inbox") {
    inboxView(root, api, {
      onThreadOpened: (threadId) => {
        location.hash = `#/thread/${threadId}`;
      },
    });
  } else if (page === "thread" && arg) {
    await threadView(root, api, arg);
  } else if (page === "portrait") {
    const person = arg || (await api.whoami()).person_id;
    await portraitView(root, api, person);
  } else if (page === "neighbors") {
    const person = arg || (await api.whoami()).person_id;
    await neighborsView(root, api, person);
  } else {
    await itemsIndex(root, api);
  }
}

async function itemsIndex(root: HTMLElement, api: ApiClient): Promise<void> {
  clear(root);
  root.append(el("h2", {}, "Items"));
  try {
    const items = await api.listItems();
    const list = el("ul", { class: "items" });
    for (const item of items) {
      list.append(
        el(
          "li",
          {},
          el("a", { href: `#/item/${encodeURIComponent(item.handle)}` }, item.title),
          ` — ${item.handle}`,
        ),
      );
    }
    root.append(list);
  } catch (error) {
    message(root, String(error), "error");
  }
}

export function boot(): void {
  const shell = document.getElementById("app");
  if (!shell) return;
  const tokenInput = el("input", {
    type: "password",
    placeholder: "API token",
    value: sessionStorage.getItem("prepub.token") ?? "",
  });
  const baseInput = el("input", {
    placeholder: "API base",
    value: localStorage.getItem("prepub.base") ?? DEFAULT_BASE,
  });
  const apply = el("button", {}, "Connect");
  const nav = el(
    "nav",
    {},
    el("a", { href: "#/" }, "Items"),
    " · ",
    el("a", { href: "#/inbox" }, "Inbox"),
    " · ",
    el("a", { href: "#/portrait" }, "My portrait"),
    " · ",
    el("a", { href: "#/neighbors" }, "My neighbors"),
  );
  const main = el("main", { id: "view" });
  shell.append(el("header", {}, baseInput, tokenInput, apply, nav), main);

  let api = makeClient();
  apply.addEventListener("click", () => {
    sessionStorage.setItem("prepub.token", tokenInput.value);
    localStorage.setItem("prepub.base", baseInput.value);
    api = makeClient();
    void route(main, api, location.hash);
  });
  window.addEventListener("hashchange", () => void route(main, api, location.hash));
  void route(main, api, location.hash);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
