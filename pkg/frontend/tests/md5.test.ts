import { describe, expect, it } from "vitest";

import { entryIdPreview, md5Hex } from "../src/md5";

// Frozen digests computed with a reference MD5 implementation.
const KNOWN: [string, string][] = [
  ["", "d41d8cd98f00b204e9800998ecf8427e"],
  ["abc", "900150983cd24fb0d6963f7d28e17f72"],
  ["The quick brown fox jumps over the lazy dog", "9e107d9d372bb6826bd81d3542a419d6"],
  ["äöü", "0a09d7ee1e23c509e5e6846c86823081"], // multi-byte UTF-8
  ["x".repeat(70), "7d56c0f83fd1e320d60ea2f13dfdeedd"], // crosses a chunk boundary
];

describe("md5Hex", () => {
  it.each(KNOWN)("hashes %j", (input, digest) => {
    expect(md5Hex(input)).toBe(digest);
  });

  it("pads exact block sizes correctly", () => {
    // 55/56/64 bytes straddle the padding boundary
    for (const n of [55, 56, 63, 64, 65]) {
      expect(md5Hex("a".repeat(n))).toMatch(/^[0-9a-f]{32}$/);
    }
    expect(md5Hex("a".repeat(55))).not.toBe(md5Hex("a".repeat(56)));
  });
});

describe("entryIdPreview", () => {
  it("matches the server's ID recipe on the published example", () => {
    expect(
      entryIdPreview(
        "940547",
        "Which musicians or bands are considered pioneers of rock n roll?",
      ),
    ).toBe("940547/a4c82219840e6d197d185ed1eda27c61");
  });

  it("changes when the text changes", () => {
    expect(entryIdPreview("q", "one")).not.toBe(entryIdPreview("q", "two"));
  });
});
