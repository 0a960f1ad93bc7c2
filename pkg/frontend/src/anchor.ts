// Fragment anchors, built exactly the way the service builds them so that
// client-side anchors are byte-identical to server-side ones.
//
// Offsets are Unicode code points. JavaScript strings index UTF-16 code
// units, so every slice here goes through a code-point array; anything
// else silently diverges on astral-plane characters.

export type Source = "abstract" | "fulltext";

export interface FragmentAnchor {
  target: string;
  source: Source;
  exact: string;
  prefix: string;
  suffix: string;
  start_hint: number;
}

export interface SelectionState {
  handle: string;
  source: Source;
  start: number; // code-point offsets into the served text
  end: number;
  extracted: string;
}

export const CONTEXT_CHARS = 64;

export function toCodePoints(text: string): string[] {
  return Array.from(text);
}

export function codePointLength(text: string): number {
  return toCodePoints(text).length;
}

/** Convert a UTF-16 code-unit offset (as DOM ranges report) to code points. */
export function utf16ToCodePointOffset(text: string, utf16Offset: number): number {
  return toCodePoints(text.slice(0, utf16Offset)).length;
}

export function createAnchor(
  doc: string,
  start: number,
  end: number,
  target: string,
  source: Source,
): FragmentAnchor {
  const points = toCodePoints(doc);
  if (!(0 <= start && start < end && end <= points.length)) {
    throw new Error(`invalid span (${start}, ${end}) for document of length ${points.length}`);
  }
  return {
    target,
    source,
    exact: points.slice(start, end).join(""),
    prefix: points.slice(Math.max(0, start - CONTEXT_CHARS), start).join(""),
    suffix: points.slice(end, end + CONTEXT_CHARS).join(""),
    start_hint: start,
  };
}

/** The form's input: a selection the reader made over the served text. */
export function selectionToAnchor(selection: SelectionState, doc: string): FragmentAnchor {
  const anchor = createAnchor(doc, selection.start, selection.end, selection.handle, selection.source);
  if (anchor.exact !== selection.extracted) {
    throw new Error("selection does not match the document span; refusing to anchor");
  }
  return anchor;
}
