"""The engine: single authority for all tree mutation.

Every operation validates against current state, emits exactly the events
that describe the change, appends them to the tree's log, and applies them
through the same transition function replay uses. Per-tree locks serialize
mutation; distinct trees proceed concurrently.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ctree.errors import (
    ConfigurationError,
    LifecycleError,
    NotFoundError,
    StructuralError,
    ValidationError,
    VolatilityError,
)
from ctree.flow import (
    CrossPolicy,
    DownstreamPolicy,
    MergeSpec,
    cross_segments,
    downstream_select,
    merge_segments,
)
from ctree.model import Msg, Node, Tree, flatten_segment, flatten_window, segment_to_dict
from ctree.persistence import (
    EVENTS_FILE,
    FileEventLog,
    MemoryEventLog,
    apply_event,
    canonical_snapshot,
    compact_purge,
    make_event,
    replay_dir,
)


@dataclass
class _Handle:
    tree: Tree | None
    log: FileEventLog | MemoryEventLog
    lock: threading.RLock = field(default_factory=threading.RLock)


class Engine:
    def __init__(self, data_dir: Path | str | None = None, provider=None, sync: bool = True):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.provider = provider
        self.sync = sync
        self._handles: dict[str, _Handle] = {}
        self._registry_lock = threading.Lock()
        self.audits: list[dict] = []
        if self.data_dir is not None:
            for tree_id, tree in replay_dir(self.data_dir).items():
                log = FileEventLog(self.data_dir / tree_id / EVENTS_FILE, sync=sync)
                self._handles[tree_id] = _Handle(tree=tree, log=log)

    # --- plumbing ---

    def _handle(self, tree_id: str) -> _Handle:
        h = self._handles.get(tree_id)
        if h is None or h.tree is None:
            raise NotFoundError(f"unknown tree {tree_id}")
        return h

    def _commit(self, h: _Handle, kind: str, tree_id: str, **fields) -> dict:
        ev = make_event(kind, tree_id, seq=h.log.last_seq + 1, **fields)
        h.log.append(ev)
        h.tree = apply_event(h.tree, ev)
        return ev

    def _node(self, h: _Handle, node_id: str) -> Node:
        node = h.tree.node(node_id)
        if node is None:
            raise NotFoundError(f"unknown node {node_id}")
        return node

    def _active_node(self, h: _Handle, node_id: str) -> Node:
        node = self._node(h, node_id)
        if not node.active:
            raise LifecycleError(f"node {node_id} is {node.status}")
        return node

    def list_trees(self) -> list[dict]:
        with self._registry_lock:
            return [
                {"id": t.id, "title": t.title, "nodes": len(t.nodes)}
                for h in sorted(self._handles.values(), key=lambda h: h.tree.id)
                for t in (h.tree,)
                if t is not None
            ]

    def snapshot(self, tree_id: str) -> bytes:
        h = self._handle(tree_id)
        with h.lock:
            return canonical_snapshot(h.tree)

    # --- operations ---

    def create_tree(self, title: str, tree_id: str | None = None) -> str:
        if not title:
            raise ValidationError("title must be non-empty")
        with self._registry_lock:
            if tree_id is None:
                tree_id = uuid.uuid4().hex[:8]
                while tree_id in self._handles:
                    tree_id = uuid.uuid4().hex[:8]
            elif tree_id in self._handles:
                raise ValidationError(f"tree {tree_id} already exists")
            if self.data_dir is not None:
                log = FileEventLog(self.data_dir / tree_id / EVENTS_FILE, sync=self.sync)
            else:
                log = MemoryEventLog()
            h = _Handle(tree=None, log=log)
            self._handles[tree_id] = h
        with h.lock:
            self._commit(h, "tree_created", tree_id, title=title, root=f"{tree_id}.n0")
        return tree_id

    def create_branch(
        self,
        tree_id: str,
        parent_id: str,
        purpose: str,
        volatile: bool,
        policy: DownstreamPolicy,
    ) -> str:
        h = self._handle(tree_id)
        with h.lock:
            parent = self._node(h, parent_id)
            if not parent.active:
                raise NotFoundError(f"parent {parent_id} is {parent.status}")
            seeded = downstream_select(parent.window, policy, parent_id, self.provider)
            node_id = f"{tree_id}.n{h.tree.next_node}"
            self._commit(
                h,
                "branch_created",
                tree_id,
                node=node_id,
                parent=parent_id,
                purpose=purpose,
                volatile=volatile,
                policy=policy.summary(),
                branch_point=len(parent.window.segments),
                seeded=[segment_to_dict(s) for s in seeded],
            )
        return node_id

    def record_exchange(
        self,
        tree_id: str,
        node_id: str,
        human: str,
        model: str,
        topic_tag: str | None = None,
    ) -> str:
        h = self._handle(tree_id)
        with h.lock:
            self._active_node(h, node_id)
            unit_id = f"{tree_id}.u{h.tree.next_seq}"
            self._commit(
                h,
                "exchange_recorded",
                tree_id,
                node=node_id,
                unit=unit_id,
                human=human,
                model=model,
                topic_tag=topic_tag,
            )
        return unit_id

    def assemble_context(
        self, tree_id: str, node_id: str, pending_human: str
    ) -> list[Msg]:
        """Assemble the node's full model input; injects at most one pending
        chunk into the window as a side effect."""
        h = self._handle(tree_id)
        with h.lock:
            node = self._active_node(h, node_id)
            if node.window.pending_chunks:
                chunk = node.window.pending_chunks[0]
                self._commit(
                    h,
                    "chunk_injected",
                    tree_id,
                    node=node_id,
                    payload=[m.to_dict() for m in chunk.payload],
                )
            return flatten_window(node.window) + [Msg("human", pending_human)]

    def post_message(self, tree_id: str, node_id: str, human: str) -> dict:
        """assemble -> complete -> record, all-or-nothing: a provider failure
        leaves the window untouched (including any pending chunk)."""
        if self.provider is None:
            raise ConfigurationError("no provider configured")
        h = self._handle(tree_id)
        with h.lock:
            node = self._active_node(h, node_id)
            chunk = node.window.pending_chunks[0] if node.window.pending_chunks else None
            messages = flatten_window(node.window)
            if chunk is not None:
                messages += flatten_segment(chunk)
            messages.append(Msg("human", human))
            model_text = self.provider.complete(messages)
            if chunk is not None:
                self._commit(
                    h,
                    "chunk_injected",
                    tree_id,
                    node=node_id,
                    payload=[m.to_dict() for m in chunk.payload],
                )
            unit_id = f"{tree_id}.u{h.tree.next_seq}"
            self._commit(
                h,
                "exchange_recorded",
                tree_id,
                node=node_id,
                unit=unit_id,
                human=human,
                model=model_text,
                topic_tag=None,
            )
            self.audits.append(
                {
                    "tree": tree_id,
                    "node": node_id,
                    "transcript": [m.to_dict() for m in messages],
                }
            )
        return {"id": unit_id, "human": human, "model": model_text}

    def delete_node(
        self,
        tree_id: str,
        node_id: str,
        disposition: str | None,
        spec: MergeSpec | None = None,
    ) -> dict:
        h = self._handle(tree_id)
        with h.lock:
            node = self._node(h, node_id)
            if node.id == h.tree.root:
                raise StructuralError("cannot delete the root node")
            if not node.active:
                raise LifecycleError(f"node {node_id} is already {node.status}")
            active_children = [c.id for c in h.tree.children(node_id) if c.active]
            if active_children:
                raise StructuralError(
                    f"node {node_id} has active children: {', '.join(sorted(active_children))}"
                )
            if disposition is None:
                raise ValidationError(
                    "a disposition (merge, purge, or archive) is required"
                )
            if disposition == "merge":
                if spec is None:
                    raise ValidationError("merge requires a merge spec")
                parent = h.tree.nodes[node.parent]
                segments = merge_segments(node.window, spec, node_id, self.provider)
                report = {
                    "transferred_segments": len(segments),
                    "transferred_messages": sum(len(s.payload) for s in segments),
                }
                self._commit(
                    h,
                    "node_merged",
                    tree_id,
                    node=node_id,
                    parent=parent.id,
                    spec=spec.summary(),
                    branch_point=node.branch_point_index,
                    segments=[segment_to_dict(s) for s in segments],
                    report=report,
                )
                return {"status": "merged", **report}
            if disposition == "purge":
                self._commit(h, "node_purged", tree_id, node=node_id)
                if isinstance(h.log, FileEventLog):
                    compact_purge(h.log, node_id)
                return {"status": "purged"}
            if disposition == "archive":
                if node.volatile:
                    raise VolatilityError(
                        f"volatile node {node_id} must be merged or purged"
                    )
                self._commit(h, "node_archived", tree_id, node=node_id)
                return {"status": "archived"}
            raise ValidationError(f"unknown disposition {disposition!r}")

    def cross_pass(
        self, tree_id: str, source_id: str, dest_id: str, policy: CrossPolicy
    ) -> dict:
        h = self._handle(tree_id)
        with h.lock:
            if source_id == dest_id:
                raise ValidationError("source and destination must differ")
            source = self._node(h, source_id)
            dest = self._node(h, dest_id)
            for n in (source, dest):
                if not n.active:
                    raise LifecycleError(f"node {n.id} is {n.status}")
            segments = cross_segments(source.window, policy, source_id, self.provider)
            self._commit(
                h,
                "cross_passed",
                tree_id,
                source=source_id,
                dest=dest_id,
                policy=policy.summary(),
                segments=[segment_to_dict(s) for s in segments],
            )
        return {
            "transferred_segments": len(segments),
            "transferred_messages": sum(len(s.payload) for s in segments),
        }

    def topology(self, tree_id: str) -> dict:
        h = self._handle(tree_id)
        with h.lock:
            t = h.tree
            return {
                "id": t.id,
                "title": t.title,
                "root": t.root,
                "open_session": t.open_session,
                "nodes": [
                    {
                        "id": n.id,
                        "parent": n.parent,
                        "purpose": n.purpose,
                        "volatile": n.volatile,
                        "status": n.status,
                        "units": len(n.window.native_units()),
                    }
                    for nid in sorted(t.nodes)
                    for n in (t.nodes[nid],)
                ],
                "edges": [
                    {"parent": n.parent, "child": n.id}
                    for nid in sorted(t.nodes)
                    for n in (t.nodes[nid],)
                    if n.parent is not None
                ],
                "flows": [
                    {"kind": f.kind, "source": f.source, "dest": f.dest}
                    for f in t.flows
                ],
            }

    def transcript(self, tree_id: str, node_id: str) -> dict:
        h = self._handle(tree_id)
        with h.lock:
            node = self._node(h, node_id)
            return {
                "node": node.id,
                "status": node.status,
                "segments": [segment_to_dict(s) for s in node.window.segments],
                "pending_chunks": len(node.window.pending_chunks),
            }

    # --- sessions ---

    def open_session(self, tree_id: str) -> str:
        h = self._handle(tree_id)
        with h.lock:
            if h.tree.open_session is not None:
                raise LifecycleError(
                    f"tree {tree_id} already has open session {h.tree.open_session}"
                )
            session_id = f"{tree_id}.s{h.tree.next_session}"
            self._commit(h, "session_opened", tree_id, session=session_id)
        return session_id

    def close_session(self, tree_id: str, session_id: str) -> dict:
        """Refuses while any volatile node is still active; the refusal lists
        them so a client can run the merge-or-purge flow."""
        h = self._handle(tree_id)
        with h.lock:
            if h.tree.open_session != session_id:
                raise LifecycleError(f"session {session_id} is not open")
            unresolved = h.tree.active_volatile_nodes()
            if unresolved:
                return {"closed": False, "unresolved_volatile": unresolved}
            self._commit(h, "session_closed", tree_id, session=session_id)
        return {"closed": True, "unresolved_volatile": []}
