"""Core conversation-tree data model.

A tree is a rooted hierarchy of nodes, each holding its own local context
window. Windows contain native segments (the node's own human/model
exchanges) and imported segments (content carried in by a flow operation,
tagged with its origin node and flow kind). All mutation goes through the
engine; this module is plain state plus read-side helpers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from ctree.errors import StructuralError

Role = Literal["system", "human", "model"]
FlowKind = Literal["downstream", "upstream", "cross", "chunk"]
NodeStatus = Literal["active", "merged", "purged", "archived"]

TERMINAL_STATUSES = ("merged", "purged", "archived")


@dataclass
class Msg:
    """One role-tagged text, the unit of flattened context.

    topic_tag rides along for the analysis harness; the engine never reads it.
    """

    role: Role
    text: str
    topic_tag: str | None = None

    def to_dict(self) -> dict:
        d: dict = {"role": self.role, "text": self.text}
        if self.topic_tag is not None:
            d["topic_tag"] = self.topic_tag
        return d

    @staticmethod
    def from_dict(d: dict) -> "Msg":
        return Msg(role=d["role"], text=d["text"], topic_tag=d.get("topic_tag"))


@dataclass
class Unit:
    """One human/model exchange pair, the atomic history element."""

    id: str
    human: str
    model: str
    topic_tag: str | None
    created_seq: int


@dataclass
class NativeSegment:
    unit: Unit


@dataclass
class ImportedSegment:
    payload: list[Msg]
    source_node: str
    flow: FlowKind


Segment = NativeSegment | ImportedSegment


@dataclass
class Window:
    """Ordered local context of one node, plus chunks awaiting injection."""

    segments: list[Segment] = field(default_factory=list)
    pending_chunks: list[ImportedSegment] = field(default_factory=list)

    def native_units(self) -> list[Unit]:
        return [s.unit for s in self.segments if isinstance(s, NativeSegment)]


@dataclass
class Node:
    id: str
    parent: str | None
    purpose: str
    volatile: bool
    branch_point_index: int
    window: Window = field(default_factory=Window)
    status: NodeStatus = "active"

    @property
    def active(self) -> bool:
        return self.status == "active"


@dataclass
class FlowRecord:
    """One recorded flow for topology/graph views."""

    kind: Literal["downstream", "upstream", "cross"]
    source: str
    dest: str


@dataclass
class Tree:
    id: str
    title: str
    root: str
    nodes: dict[str, Node] = field(default_factory=dict)
    flows: list[FlowRecord] = field(default_factory=list)
    next_seq: int = 1
    next_node: int = 1
    next_session: int = 1
    open_session: str | None = None

    def node(self, node_id: str) -> Node | None:
        return self.nodes.get(node_id)

    def children(self, node_id: str) -> list[Node]:
        return [n for n in self.nodes.values() if n.parent == node_id]

    def active_volatile_nodes(self) -> list[str]:
        return sorted(n.id for n in self.nodes.values() if n.volatile and n.active)


def flatten_segment(seg: Segment) -> list[Msg]:
    if isinstance(seg, NativeSegment):
        u = seg.unit
        return [
            Msg("human", u.human, u.topic_tag),
            Msg("model", u.model, u.topic_tag),
        ]
    return list(seg.payload)


def flatten_window(window: Window) -> list[Msg]:
    out: list[Msg] = []
    for seg in window.segments:
        out.extend(flatten_segment(seg))
    return out


def check_tree_shape(tree: Tree) -> None:
    """Verify acyclicity, connectivity, and single-root by traversal."""
    roots = [n for n in tree.nodes.values() if n.parent is None]
    if len(roots) != 1 or roots[0].id != tree.root:
        raise StructuralError(f"tree {tree.id} must have exactly one root")
    seen: set[str] = set()
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        if nid in seen:
            raise StructuralError(f"cycle detected at node {nid}")
        seen.add(nid)
        stack.extend(c.id for c in tree.children(nid))
    if seen != set(tree.nodes):
        raise StructuralError(f"disconnected nodes in tree {tree.id}")


# --- canonical serialization (sorted node ids, stable field order) ---


def segment_to_dict(seg: Segment) -> dict:
    if isinstance(seg, NativeSegment):
        u = seg.unit
        return {
            "kind": "native",
            "unit": {
                "id": u.id,
                "human": u.human,
                "model": u.model,
                "topic_tag": u.topic_tag,
                "created_seq": u.created_seq,
            },
        }
    return {
        "kind": "imported",
        "payload": [m.to_dict() for m in seg.payload],
        "source_node": seg.source_node,
        "flow": seg.flow,
    }


def segment_from_dict(d: dict) -> Segment:
    if d["kind"] == "native":
        u = d["unit"]
        return NativeSegment(
            Unit(u["id"], u["human"], u["model"], u.get("topic_tag"), u["created_seq"])
        )
    return ImportedSegment(
        payload=[Msg.from_dict(m) for m in d["payload"]],
        source_node=d["source_node"],
        flow=d["flow"],
    )


def tree_to_dict(tree: Tree) -> dict:
    return {
        "id": tree.id,
        "title": tree.title,
        "root": tree.root,
        "next_seq": tree.next_seq,
        "next_node": tree.next_node,
        "next_session": tree.next_session,
        "open_session": tree.open_session,
        "flows": [
            {"kind": f.kind, "source": f.source, "dest": f.dest} for f in tree.flows
        ],
        "nodes": {
            nid: {
                "id": n.id,
                "parent": n.parent,
                "purpose": n.purpose,
                "volatile": n.volatile,
                "branch_point_index": n.branch_point_index,
                "status": n.status,
                "window": {
                    "segments": [segment_to_dict(s) for s in n.window.segments],
                    "pending_chunks": [
                        segment_to_dict(s) for s in n.window.pending_chunks
                    ],
                },
            }
            for nid in sorted(tree.nodes)
            for n in (tree.nodes[nid],)
        },
    }
