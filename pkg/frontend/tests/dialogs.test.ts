import { describe, expect, it } from "vitest";
import { BRANCH_CHOICES, MERGE_CHOICES, deleteDialogOptions } from "../src/dialogs";
import type { TopologyNode } from "../src/types";

function node(volatile: boolean): TopologyNode {
  return {
    id: "t.n1",
    parent: "t.n0",
    purpose: "x",
    volatile,
    status: "active",
    units: 1,
  };
}

describe("deleteDialogOptions", () => {
  it("offers exactly merge and purge for a volatile node", () => {
    expect(deleteDialogOptions(node(true))).toEqual(["merge", "purge"]);
  });

  it("adds archive for a non-volatile node", () => {
    expect(deleteDialogOptions(node(false))).toEqual(["merge", "purge", "archive"]);
  });
});

describe("branch choices", () => {
  it("puts full context and clean slate front and centre", () => {
    const primary = BRANCH_CHOICES.filter((c) => !c.advanced).map((c) => c.id);
    expect(primary).toEqual(["full", "none"]);
  });

  it("produces well-formed seeding policies", () => {
    const byId = new Map(BRANCH_CHOICES.map((c) => [c.id, c]));
    expect(byId.get("full")!.policy(0)).toEqual({ kind: "full" });
    expect(byId.get("none")!.policy(0)).toEqual({ kind: "none" });
    expect(byId.get("last_k")!.policy(3)).toEqual({ kind: "last_k", k: 3 });
    expect(byId.get("summarize")!.policy(200)).toEqual({ kind: "summarize", budget: 200 });
  });
});

describe("merge choices", () => {
  it("covers end, branch point, summary, and staggered insertion", () => {
    const specs = MERGE_CHOICES.map((c) => c.spec(2));
    expect(specs).toContainEqual({ selection: { kind: "all" }, position: "end" });
    expect(specs).toContainEqual({ selection: { kind: "all" }, position: "branch_point" });
    expect(specs).toContainEqual({
      selection: { kind: "summarize", budget: 2 },
      position: "end",
    });
    expect(specs).toContainEqual({
      selection: { kind: "all" },
      position: "chunked",
      chunks: 2,
    });
  });
});
