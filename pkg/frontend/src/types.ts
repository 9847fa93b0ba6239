/** Payload shapes of the conversation-tree HTTP API. */

export type NodeStatus = "active" | "merged" | "purged" | "archived";
export type FlowKind = "downstream" | "upstream" | "cross";

export interface TopologyNode {
  id: string;
  parent: string | null;
  purpose: string;
  volatile: boolean;
  status: NodeStatus;
  units: number;
}

export interface TopologyEdge {
  parent: string;
  child: string;
}

export interface TopologyFlow {
  kind: FlowKind;
  source: string;
  dest: string;
}

export interface Topology {
  id: string;
  title: string;
  root: string;
  open_session: string | null;
  nodes: TopologyNode[];
  edges: TopologyEdge[];
  flows: TopologyFlow[];
}

export interface TranscriptMessage {
  role: "system" | "human" | "model";
  text: string;
}

export interface NativeSegment {
  kind: "native";
  unit: {
    id: string;
    human: string;
    model: string;
    topic_tag: string | null;
    created_seq: number;
  };
}

export interface ImportedSegment {
  kind: "imported";
  payload: TranscriptMessage[];
  source_node: string;
  flow: "downstream" | "upstream" | "cross" | "chunk";
}

export type TranscriptSegment = NativeSegment | ImportedSegment;

export interface Transcript {
  node: string;
  status: NodeStatus;
  segments: TranscriptSegment[];
  pending_chunks: number;
}

export interface ApiError {
  error: { code: string; message: string };
}

export type DownstreamPolicy =
  | { kind: "none" | "full" }
  | { kind: "last_k"; k: number }
  | { kind: "select"; ids: string[] }
  | { kind: "summarize"; budget: number };

export type Selection =
  | { kind: "all" }
  | { kind: "select"; ids: string[] }
  | { kind: "summarize"; budget: number };

export interface MergeSpec {
  selection: Selection;
  position: "end" | "branch_point" | "chunked";
  chunks?: number;
}
