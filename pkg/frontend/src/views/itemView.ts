// Item reader: plain-text rendering of abstract/full text, fragment
// selection, the four-kind annotation form, the relationship builder and
// the list of outputs linked to the item.
//
// The text is rendered as one text node per source block, so DOM range
// offsets are UTF-16 offsets into exactly the text the API served;
// conversion to code points happens in one place.

import { selectionToAnchor, utf16ToCodePointOffset, type SelectionState, type Source } from "../anchor";
import type { ApiClient, Item, OutputRecord } from "../api";
import { clear, el, message } from "../dom";

const KINDS = ["comment", "assertion", "quotation", "micropaper"] as const;
type FormKind = (typeof KINDS)[number];

export interface ItemViewOptions {
  /** Overridable in tests; defaults to the live window selection. */
  selectionProvider?: () => Selection | null;
  onOutputsRendered?: (outputs: OutputRecord[]) => void;
}

function outputSnippet(output: OutputRecord): string {
  switch (output.kind) {
    case "comment":
      return output.body ?? "";
    case "assertion": {
      const s = output.statement;
      return s ? `${s.subject} ${s.predicate} ${s.object}` : "";
    }
    case "quotation":
      return `"${output.anchor?.exact ?? ""}" — ${output.comment ?? ""}`;
    case "micropaper":
      return output.title ?? "";
    case "relationship":
      return `${output.from_ref?.id} ${output.relation} ${output.to_ref?.id}`;
  }
}

export function renderOutputs(container: HTMLElement, outputs: OutputRecord[]): void {
  clear(container);
  container.append(el("h3", {}, `Linked outputs (${outputs.length})`));
  const list = el("ul", { class: "outputs", "data-testid": "output-list" });
  for (const output of outputs) {
    list.append(
      el(
        "li",
        { "data-output-id": output.output_id },
        el("span", { class: `badge kind-${output.kind}`, "data-testid": "kind-badge" }, output.kind),
        ` v${output.version} by ${output.creator}: `,
        outputSnippet(output),
      ),
    );
  }
  container.append(list);
}

export async function itemView(
  root: HTMLElement,
  api: ApiClient,
  handle: string,
  options: ItemViewOptions = {},
): Promise<void> {
  const getSelection = options.selectionProvider ?? (() => window.getSelection());
  clear(root);

  let item: Item;
  try {
    item = await api.getItem(handle);
  } catch (error) {
    message(root, String(error), "error");
    return;
  }

  root.append(el("h2", {}, `${item.title} `), el("code", {}, item.handle));

  const textBlocks = el("div", { class: "texts" });
  const docs = new Map<Source, string>();
  for (const source of ["abstract", "fulltext"] as Source[]) {
    const text = source === "abstract" ? item.abstract : item.fulltext;
    if (!text) continue;
    docs.set(source, text);
    const pre = el("pre", { class: "doc", "data-source": source });
    pre.textContent = text; // exactly one text node: offsets stay honest
    textBlocks.append(el("h3", {}, source), pre);
  }
  root.append(textBlocks);

  const formHost = el("div", { class: "annotate-form", "data-testid": "annotate-form" });
  formHost.hidden = true;
  root.append(formHost);

  const outputsHost = el("div", { class: "outputs-host" });
  root.append(outputsHost);

  async function refreshOutputs(): Promise<void> {
    const outputs = await api.itemOutputs(handle);
    renderOutputs(outputsHost, outputs);
    options.onOutputsRendered?.(outputs);
  }

  let current: SelectionState | null = null;

  function readSelection(): void {
    const selection = getSelection();
    if (!selection || selection.isCollapsed || selection.rangeCount === 0) {
      formHost.hidden = true; // empty selection: no form (spec rule)
      return;
    }
    const range = selection.getRangeAt(0);
    const startBlock = (range.startContainer.parentElement ?? null)?.closest("pre.doc");
    const endBlock = (range.endContainer.parentElement ?? null)?.closest("pre.doc");
    if (!startBlock || startBlock !== endBlock || range.startContainer !== range.endContainer) {
      message(root, "Selection crosses a text boundary; select within one block.", "error");
      formHost.hidden = true;
      return;
    }
    const source = startBlock.getAttribute("data-source") as Source;
    const doc = docs.get(source)!;
    const start = utf16ToCodePointOffset(doc, range.startOffset);
    const end = utf16ToCodePointOffset(doc, range.endOffset);
    if (start >= end) {
      formHost.hidden = true;
      return;
    }
    current = { handle: item.handle, source, start, end, extracted: selection.toString() };
    showForm();
  }

  function showForm(): void {
    if (!current) return;
    clear(formHost);
    formHost.hidden = false;
    formHost.append(
      el("p", {}, "Selected: ", el("em", { "data-testid": "selected-text" }, current.extracted)),
    );
    const kindSelect = el("select", { "data-testid": "kind-select" });
    for (const kind of KINDS) kindSelect.append(el("option", { value: kind }, kind));
    const fields = el("div", { class: "fields" });
    const visibility = el("select", { "data-testid": "visibility-select" });
    visibility.append(el("option", { value: "public" }, "public"));
    visibility.append(el("option", { value: "private" }, "private"));

    function renderFields(): void {
      clear(fields);
      const kind = kindSelect.value as FormKind;
      if (kind === "comment") {
        fields.append(el("textarea", { name: "body", placeholder: "your comment" }));
      } else if (kind === "assertion") {
        fields.append(
          el("input", { name: "subject", placeholder: "subject" }),
          el("input", { name: "predicate", placeholder: "predicate" }),
          el("input", { name: "object", placeholder: "object" }),
        );
      } else if (kind === "quotation") {
        fields.append(
          el("textarea", { name: "comment", placeholder: "why is this fragment worth sharing?" }),
        );
      } else {
        fields.append(
          el("input", { name: "title", placeholder: "micro paper title" }),
          el("textarea", { name: "body", placeholder: "your argument" }),
        );
      }
    }
    kindSelect.addEventListener("change", renderFields);
    renderFields();

    const submit = el("button", { "data-testid": "submit-output" }, "Create");
    submit.addEventListener("click", async () => {
      if (!current) return;
      const kind = kindSelect.value as FormKind;
      const value = (name: string): string =>
        (fields.querySelector(`[name="${name}"]`) as HTMLInputElement | HTMLTextAreaElement | null)
          ?.value ?? "";
      try {
        const anchor = selectionToAnchor(current, docs.get(current.source)!);
        const payload: Record<string, unknown> = {
          kind,
          anchor,
          visibility: visibility.value,
        };
        if (kind === "comment") payload.body = value("body");
        if (kind === "assertion")
          payload.statement = {
            subject: value("subject"),
            predicate: value("predicate"),
            object: value("object"),
          };
        if (kind === "quotation") payload.comment = value("comment");
        if (kind === "micropaper") {
          payload.title = value("title");
          payload.body = value("body");
        }
        await api.createOutput(payload); // wait; then re-read from the API
        formHost.hidden = true;
        current = null;
        await refreshOutputs();
        message(root, "Output created.", "info");
      } catch (error) {
        message(root, String(error), "error");
      }
    });

    formHost.append(
      el("label", {}, "Kind: ", kindSelect),
      fields,
      el("label", {}, "Visibility: ", visibility),
      submit,
    );
  }

  textBlocks.addEventListener("mouseup", readSelection);

  // relationship builder (the fifth usage action)
  const relationSelect = el("select", { "data-testid": "relation-select" });
  try {
    const response = await fetch(`${api.base}/taxonomy`);
    for (const rt of (await response.json()) as { code: string }[]) {
      relationSelect.append(el("option", { value: rt.code }, rt.code));
    }
  } catch {
    // taxonomy unavailable: leave the select empty, submission will fail loudly
  }
  const fromInput = el("input", {
    name: "from_ref",
    value: `item:${item.handle}`,
    "data-testid": "from-ref",
  });
  const toInput = el("input", { name: "to_ref", placeholder: "item:RePEc:... or micro:mo-...", "data-testid": "to-ref" });
  const relateButton = el("button", { "data-testid": "submit-relation" }, "Relate");
  relateButton.addEventListener("click", async () => {
    const parse = (text: string) => {
      const index = text.indexOf(":");
      return { kind: text.slice(0, index), id: text.slice(index + 1) };
    };
    try {
      await api.createOutput({
        kind: "relationship",
        from_ref: parse(fromInput.value),
        to_ref: parse(toInput.value),
        relation: relationSelect.value,
        visibility: "public",
      });
      await refreshOutputs();
      message(root, "Relationship created.", "info");
    } catch (error) {
      message(root, String(error), "error");
    }
  });
  root.append(
    el(
      "div",
      { class: "relate-form" },
      el("h3", {}, "Create relationship"),
      fromInput,
      relationSelect,
      toInput,
      relateButton,
    ),
  );

  await refreshOutputs();
}
