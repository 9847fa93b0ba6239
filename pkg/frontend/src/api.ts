/** Thin client over the conversation-tree service. The UI computes no state
 * of its own: everything rendered comes straight from these responses. */

import type { DownstreamPolicy, MergeSpec, Selection, Topology, Transcript } from "./types";

export class ApiClientError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

async function call<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await resp.json();
  if (!resp.ok) {
    const err = body?.error ?? { code: "internal", message: resp.statusText };
    throw new ApiClientError(err.code, err.message);
  }
  return body as T;
}

export class Api {
  constructor(private base: string = "") {}

  createTree(title: string): Promise<{ id: string }> {
    return call(`${this.base}/trees`, {
      method: "POST",
      body: JSON.stringify({ title }),
    });
  }

  listTrees(): Promise<{ trees: { id: string; title: string; nodes: number }[] }> {
    return call(`${this.base}/trees`);
  }

  topology(tree: string): Promise<Topology> {
    return call(`${this.base}/trees/${tree}/topology`);
  }

  createBranch(
    tree: string,
    parent: string,
    purpose: string,
    volatile: boolean,
    policy: DownstreamPolicy,
  ): Promise<{ id: string }> {
    return call(`${this.base}/trees/${tree}/nodes`, {
      method: "POST",
      body: JSON.stringify({ parent, purpose, volatile, policy }),
    });
  }

  postMessage(
    tree: string,
    node: string,
    human: string,
  ): Promise<{ id: string; human: string; model: string }> {
    return call(`${this.base}/trees/${tree}/nodes/${node}/messages`, {
      method: "POST",
      body: JSON.stringify({ human }),
    });
  }

  transcript(tree: string, node: string): Promise<Transcript> {
    return call(`${this.base}/trees/${tree}/nodes/${node}/transcript`);
  }

  deleteNode(
    tree: string,
    node: string,
    disposition: "merge" | "purge" | "archive",
    spec?: MergeSpec,
  ): Promise<{ status: string }> {
    return call(`${this.base}/trees/${tree}/nodes/${node}`, {
      method: "DELETE",
      body: JSON.stringify({ disposition, spec: spec ?? null }),
    });
  }

  crossPass(
    tree: string,
    source: string,
    dest: string,
    selection: Selection,
  ): Promise<{ transferred_segments: number }> {
    return call(`${this.base}/trees/${tree}/passes`, {
      method: "POST",
      body: JSON.stringify({ source, dest, policy: { selection } }),
    });
  }

  openSession(tree: string): Promise<{ id: string }> {
    return call(`${this.base}/trees/${tree}/sessions`, { method: "POST" });
  }

  closeSession(
    tree: string,
    session: string,
  ): Promise<{ closed: boolean; unresolved_volatile: string[] }> {
    return call(`${this.base}/trees/${tree}/sessions/${session}`, {
      method: "DELETE",
    });
  }
}
