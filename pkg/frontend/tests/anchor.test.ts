import { describe, expect, it } from "vitest";

import {
  codePointLength,
  createAnchor,
  selectionToAnchor,
  utf16ToCodePointOffset,
} from "../src/anchor";

describe("createAnchor", () => {
  it("extracts exact, context and hint", () => {
    const anchor = createAnchor("abcdef", 2, 4, "RePEc:aa:bb:cc", "abstract");
    expect(anchor).toEqual({
      target: "RePEc:aa:bb:cc",
      source: "abstract",
      exact: "cd",
      prefix: "ab",
      suffix: "ef",
      start_hint: 2,
    });
  });

  it("shortens context at document boundaries", () => {
    const anchor = createAnchor("xy", 0, 1, "RePEc:aa:bb:cc", "abstract");
    expect(anchor.prefix).toBe("");
    expect(anchor.exact).toBe("x");
    expect(anchor.suffix).toBe("y");
  });

  it("caps context at 64 code points", () => {
    const doc = "a".repeat(200);
    const anchor = createAnchor(doc, 100, 110, "RePEc:aa:bb:cc", "fulltext");
    expect(anchor.prefix).toHaveLength(64);
    expect(anchor.suffix).toHaveLength(64);
  });

  it("rejects invalid spans", () => {
    expect(() => createAnchor("abcdef", 4, 2, "RePEc:aa:bb:cc", "abstract")).toThrow();
    expect(() => createAnchor("abcdef", 2, 2, "RePEc:aa:bb:cc", "abstract")).toThrow();
    expect(() => createAnchor("abcdef", 0, 9, "RePEc:aa:bb:cc", "abstract")).toThrow();
  });

  it("counts astral characters as single positions", () => {
    const doc = "a𝕓c𝕕e"; // 5 code points, 7 UTF-16 units
    expect(codePointLength(doc)).toBe(5);
    const anchor = createAnchor(doc, 1, 3, "RePEc:aa:bb:cc", "abstract");
    expect(anchor.exact).toBe("𝕓c");
    expect(anchor.prefix).toBe("a");
    expect(anchor.suffix).toBe("𝕕e");
  });
});

describe("utf16ToCodePointOffset", () => {
  it("is identity on the BMP", () => {
    expect(utf16ToCodePointOffset("hello", 3)).toBe(3);
  });

  it("collapses surrogate pairs", () => {
    const doc = "a𝕓c"; // UTF-16: a, D835, DD53, c
    expect(utf16ToCodePointOffset(doc, 1)).toBe(1);
    expect(utf16ToCodePointOffset(doc, 3)).toBe(2);
    expect(utf16ToCodePointOffset(doc, 4)).toBe(3);
  });
});

describe("selectionToAnchor", () => {
  const doc = "the quick brown fox";

  it("accepts a selection whose text matches the span", () => {
    const anchor = selectionToAnchor(
      { handle: "RePEc:aa:bb:cc", source: "abstract", start: 4, end: 9, extracted: "quick" },
      doc,
    );
    expect(anchor.exact).toBe("quick");
    expect(anchor.start_hint).toBe(4);
  });

  it("refuses a selection that disagrees with the document", () => {
    expect(() =>
      selectionToAnchor(
        { handle: "RePEc:aa:bb:cc", source: "abstract", start: 4, end: 9, extracted: "brown" },
        doc,
      ),
    ).toThrow(/does not match/);
  });
});
