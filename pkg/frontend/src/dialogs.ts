/** Option models for the branch and delete dialogs.
 *
 * These are pure functions so the contract — which choices a given node is
 * allowed — is testable without a DOM.
 */

import type { DownstreamPolicy, MergeSpec, TopologyNode } from "./types";

export type Disposition = "merge" | "purge" | "archive";

/** A volatile node must resolve to merge or purge; only non-volatile nodes
 * may additionally be archived in place. */
export function deleteDialogOptions(node: TopologyNode): Disposition[] {
  const options: Disposition[] = ["merge", "purge"];
  if (!node.volatile) options.push("archive");
  return options;
}

export interface BranchChoice {
  id: string;
  label: string;
  advanced: boolean;
  policy: (arg: number) => DownstreamPolicy;
  needsArg: boolean;
  argLabel?: string;
}

/** Seeding choices for a new branch. "Full context" and "clean slate" are the
 * primary pair; the parameterised policies sit behind an advanced toggle. */
export const BRANCH_CHOICES: BranchChoice[] = [
  {
    id: "full",
    label: "Full context",
    advanced: false,
    policy: () => ({ kind: "full" }),
    needsArg: false,
  },
  {
    id: "none",
    label: "Clean slate",
    advanced: false,
    policy: () => ({ kind: "none" }),
    needsArg: false,
  },
  {
    id: "last_k",
    label: "Last k exchanges",
    advanced: true,
    policy: (k) => ({ kind: "last_k", k }),
    needsArg: true,
    argLabel: "k",
  },
  {
    id: "summarize",
    label: "Summary within budget",
    advanced: true,
    policy: (budget) => ({ kind: "summarize", budget }),
    needsArg: true,
    argLabel: "token budget",
  },
];

export interface MergeChoice {
  id: string;
  label: string;
  spec: (arg: number) => MergeSpec;
  needsArg: boolean;
  argLabel?: string;
}

/** How merged content lands in the parent when a node is resolved. */
export const MERGE_CHOICES: MergeChoice[] = [
  {
    id: "all_end",
    label: "Everything, appended at the end",
    spec: () => ({ selection: { kind: "all" }, position: "end" }),
    needsArg: false,
  },
  {
    id: "all_branch_point",
    label: "Everything, at the branch point",
    spec: () => ({ selection: { kind: "all" }, position: "branch_point" }),
    needsArg: false,
  },
  {
    id: "summary_end",
    label: "Summary within budget, at the end",
    spec: (budget) => ({ selection: { kind: "summarize", budget }, position: "end" }),
    needsArg: true,
    argLabel: "token budget",
  },
  {
    id: "chunked",
    label: "Staggered over the next k turns",
    spec: (k) => ({ selection: { kind: "all" }, position: "chunked", chunks: k }),
    needsArg: true,
    argLabel: "k",
  },
];
