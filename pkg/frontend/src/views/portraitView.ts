// Public portrait and neighbor pages: raw counters straight from the API,
// no scores invented client-side.

import type { ApiClient } from "../api";
import { clear, el, message } from "../dom";

export async function portraitView(root: HTMLElement, api: ApiClient, personId: string): Promise<void> {
  clear(root);
  try {
    const portrait = await api.portrait(personId);
    root.append(el("h2", {}, `Portrait of ${portrait.person_id}`));
    const table = el("table", { class: "portrait", "data-testid": "portrait-table" });
    const row = (name: string, value: number) =>
      table.append(
        el("tr", {}, el("td", {}, name), el("td", { "data-counter": name }, String(value))),
      );
    for (const [kind, count] of Object.entries(portrait.created_counts)) {
      row(`created ${kind}`, count);
    }
    row("received usage", portrait.received_usage_count);
    row("notifications received", portrait.notifications_received);
    row("notifications responded", portrait.notifications_responded);
    row("threads joined", portrait.threads_joined);
    row("offers made", portrait.offers_made);
    root.append(table);
  } catch (error) {
    message(root, String(error), "error");
  }
}

export async function neighborsView(root: HTMLElement, api: ApiClient, personId: string): Promise<void> {
  clear(root);
  try {
    const report = await api.neighbors(personId);
    root.append(el("h2", {}, `Neighbors of ${report.person_id}`));
    for (const direction of ["upstream", "downstream"] as const) {
      const list = el("ol", { class: direction, "data-testid": `${direction}-list` });
      for (const entry of report[direction]) {
        list.append(el("li", {}, `${entry.person_id} (${entry.usage_count})`));
      }
      root.append(el("h3", {}, direction), list);
    }
  } catch (error) {
    message(root, String(error), "error");
  }
}
