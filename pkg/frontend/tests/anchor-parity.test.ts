// Anchor parity: the client must produce byte-identical anchors to the
// golden corpus generated by the core engine for the same selections.

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { createAnchor, type FragmentAnchor, type Source } from "../src/anchor";

interface GoldenCase {
  doc: string;
  start: number;
  end: number;
  target: string;
  source: Source;
  anchor: FragmentAnchor;
}

const corpus = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "anchor-golden.json"), "utf-8"),
) as { cases: GoldenCase[] };

function canonical(anchor: FragmentAnchor): string {
  const sorted: Record<string, unknown> = {};
  for (const key of Object.keys(anchor).sort()) {
    sorted[key] = anchor[key as keyof FragmentAnchor];
  }
  return JSON.stringify(sorted);
}

describe("anchor parity with the core golden corpus", () => {
  it("has enough cases to be meaningful", () => {
    expect(corpus.cases.length).toBeGreaterThanOrEqual(50);
  });

  it("matches every golden anchor byte for byte", () => {
    let matched = 0;
    for (const testCase of corpus.cases) {
      const produced = createAnchor(
        testCase.doc,
        testCase.start,
        testCase.end,
        testCase.target,
        testCase.source,
      );
      expect(canonical(produced), `case ${matched}`).toBe(canonical(testCase.anchor));
      matched += 1;
    }
    expect(matched).toBe(corpus.cases.length);
  });
});
