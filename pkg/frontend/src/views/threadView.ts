// Assistance thread: message history, posting (optionally attaching an
// output, e.g. a revision), and the competing-offer form. The offer form
// only exists on public threads.

import type { ApiClient, Thread } from "../api";
import { clear, el, message } from "../dom";

export async function threadView(root: HTMLElement, api: ApiClient, threadId: string): Promise<void> {
  clear(root);
  let thread: Thread;
  try {
    thread = await api.getThread(threadId);
  } catch (error) {
    message(root, String(error), "error");
    return;
  }

  root.append(
    el("h2", {}, `Thread ${thread.thread_id} (${thread.visibility})`),
    el("p", {}, `participants: ${thread.participants.join(", ")}`),
  );

  const messages = el("ul", { class: "messages", "data-testid": "message-list" });
  for (const entry of thread.messages) {
    messages.append(
      el(
        "li",
        {},
        el("strong", {}, entry.author),
        `: ${entry.body}`,
        entry.attached_output ? el("code", {}, ` [attached ${entry.attached_output}]`) : null,
      ),
    );
  }
  root.append(messages);

  const bodyInput = el("textarea", { "data-testid": "post-body", placeholder: "reply" });
  const attachInput = el("input", { "data-testid": "post-attach", placeholder: "attach output id (optional)" });
  const postButton = el("button", { "data-testid": "post-message" }, "Post");
  postButton.addEventListener("click", async () => {
    try {
      await api.postMessage(threadId, bodyInput.value, attachInput.value || undefined);
      await threadView(root, api, threadId); // re-render from the API
    } catch (error) {
      message(root, String(error), "error");
    }
  });
  root.append(el("div", { class: "post-form" }, bodyInput, attachInput, postButton));

  if (thread.visibility === "public") {
    const offerRef = el("input", { "data-testid": "offer-ref", placeholder: "micro:mo-... or item:RePEc:..." });
    const offerNote = el("input", { "data-testid": "offer-note", placeholder: "why yours is better" });
    const offerButton = el("button", { "data-testid": "submit-offer" }, "Offer alternative");
    offerButton.addEventListener("click", async () => {
      const text = offerRef.value;
      const index = text.indexOf(":");
      try {
        await api.submitOffer(
          threadId,
          { kind: text.slice(0, index), id: text.slice(index + 1) },
          offerNote.value,
        );
        await threadView(root, api, threadId);
      } catch (error) {
        message(root, String(error), "error");
      }
    });
    root.append(el("div", { class: "offer-form", "data-testid": "offer-form" }, offerRef, offerNote, offerButton));
  }
}
