/** Application wiring: fetch state from the service, render, and translate
 * user gestures into API calls. All state lives on the server; every
 * mutation is followed by a refetch. */

import { Api, ApiClientError } from "./api";
import { buildGraphView } from "./graph";
import { BRANCH_CHOICES } from "./dialogs";
import {
  renderDeleteDialog,
  renderGraph,
  renderTranscript,
  renderUnresolvedBanner,
} from "./render";
import type { Topology, TopologyNode } from "./types";

interface AppElements {
  graph: HTMLElement;
  transcript: HTMLElement;
  chatInput: HTMLInputElement;
  chatSend: HTMLButtonElement;
  branchButton: HTMLButtonElement;
  deleteButton: HTMLButtonElement;
  closeButton: HTMLButtonElement;
  dialogHost: HTMLElement;
  banner: HTMLElement;
  status: HTMLElement;
}

export class App {
  private topology: Topology | null = null;
  private selected: string | null = null;

  constructor(
    private api: Api,
    private tree: string,
    private el: AppElements,
  ) {}

  async refresh(): Promise<void> {
    this.topology = await this.api.topology(this.tree);
    if (!this.selected || !this.topology.nodes.some((n) => n.id === this.selected)) {
      this.selected = this.topology.root;
    }
    const svg = renderGraph(this.el.graph, buildGraphView(this.topology));
    for (const g of svg.querySelectorAll<SVGGElement>("g.tree-node")) {
      g.addEventListener("click", () => {
        this.selected = g.dataset.node ?? null;
        void this.showTranscript();
      });
      if (g.dataset.node === this.selected) g.classList.add("selected");
    }
    await this.showTranscript();
  }

  private selectedNode(): TopologyNode | null {
    return this.topology?.nodes.find((n) => n.id === this.selected) ?? null;
  }

  private async showTranscript(): Promise<void> {
    if (!this.selected) return;
    const transcript = await this.api.transcript(this.tree, this.selected);
    renderTranscript(this.el.transcript, transcript);
    const node = this.selectedNode();
    this.el.status.textContent = node
      ? `${node.purpose} (${node.id}) — ${node.status}${node.volatile ? ", volatile" : ""}`
      : "";
  }

  async send(): Promise<void> {
    const text = this.el.chatInput.value.trim();
    if (!text || !this.selected) return;
    this.el.chatInput.value = "";
    await this.run(() => this.api.postMessage(this.tree, this.selected!, text));
  }

  async branch(): Promise<void> {
    if (!this.selected) return;
    const purpose = window.prompt("Purpose of the new branch?");
    if (!purpose) return;
    const volatile = window.confirm("Volatile? (must be merged or purged before session close)");
    const choiceId = window.prompt(
      `Seed context: ${BRANCH_CHOICES.map((c) => c.id).join(" / ")}`,
      "full",
    );
    const choice = BRANCH_CHOICES.find((c) => c.id === choiceId) ?? BRANCH_CHOICES[0];
    let arg = 0;
    if (choice.needsArg) {
      arg = Number(window.prompt(`${choice.argLabel}?`, "4") ?? "4");
    }
    await this.run(() =>
      this.api.createBranch(this.tree, this.selected!, purpose, volatile, choice.policy(arg)),
    );
  }

  delete(): void {
    const node = this.selectedNode();
    if (!node) return;
    this.el.dialogHost.textContent = "";
    renderDeleteDialog(
      this.el.dialogHost,
      node,
      (disposition) => {
        this.el.dialogHost.textContent = "";
        void this.run(() =>
          this.api.deleteNode(this.tree, node.id, disposition as "merge" | "purge" | "archive"),
        );
      },
      () => {
        this.el.dialogHost.textContent = "";
      },
    );
  }

  async closeSession(): Promise<void> {
    if (!this.topology) return;
    let session = this.topology.open_session;
    if (!session) session = (await this.api.openSession(this.tree)).id;
    const result = await this.api.closeSession(this.tree, session);
    renderUnresolvedBanner(this.el.banner, result.closed ? [] : result.unresolved_volatile);
    await this.refresh();
  }

  private async run(action: () => Promise<unknown>): Promise<void> {
    try {
      await action();
      renderUnresolvedBanner(this.el.banner, []);
    } catch (err) {
      if (err instanceof ApiClientError) {
        this.el.status.textContent = `error (${err.code}): ${err.message}`;
      } else {
        throw err;
      }
    }
    await this.refresh();
  }
}

export function wire(api: Api, tree: string, root: Document = document): App {
  const pick = <T extends HTMLElement>(id: string) => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  const app = new App(api, tree, {
    graph: pick("graph"),
    transcript: pick("transcript"),
    chatInput: pick<HTMLInputElement>("chat-input"),
    chatSend: pick<HTMLButtonElement>("chat-send"),
    branchButton: pick<HTMLButtonElement>("branch-button"),
    deleteButton: pick<HTMLButtonElement>("delete-button"),
    closeButton: pick<HTMLButtonElement>("close-button"),
    dialogHost: pick("dialog-host"),
    banner: pick("banner"),
    status: pick("status"),
  });
  pick<HTMLButtonElement>("chat-send").addEventListener("click", () => void app.send());
  pick<HTMLInputElement>("chat-input").addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key === "Enter") void app.send();
  });
  pick<HTMLButtonElement>("branch-button").addEventListener("click", () => void app.branch());
  pick<HTMLButtonElement>("delete-button").addEventListener("click", () => app.delete());
  pick<HTMLButtonElement>("close-button").addEventListener("click", () => void app.closeSession());
  return app;
}

/** Browser entry point: pick the tree from the query string, or create one. */
export async function boot(baseUrl = ""): Promise<App> {
  const api = new Api(baseUrl);
  const params = new URLSearchParams(window.location.search);
  let tree = params.get("tree");
  if (!tree) {
    const existing = await api.listTrees();
    tree = existing.trees[0]?.id ?? (await api.createTree("workspace")).id;
  }
  const app = wire(api, tree);
  await app.refresh();
  return app;
}
