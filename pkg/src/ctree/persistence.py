"""Event-sourced durability.

Every state change is one appended JSONL record; the live tree is always
reproducible by replaying the log through the same transition function the
engine uses. Purged node content is scrubbed from the log by a
copy-compact-rename rewrite that preserves replay equivalence.

File layout: one directory per tree holding ``events.jsonl`` and an optional
``snapshot.json`` (canonical serialization, sorted keys and node ids).
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path

from ctree.errors import ContractError, IntegrityError
from ctree.flow import insert_merged
from ctree.model import (
    NativeSegment,
    Node,
    FlowRecord,
    Tree,
    Unit,
    Window,
    segment_from_dict,
    tree_to_dict,
)

EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "snapshot.json"


def canonical_snapshot(tree: Tree) -> bytes:
    """Byte-identical for equal states."""
    return json.dumps(
        tree_to_dict(tree), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def make_event(kind: str, tree_id: str, seq: int, **fields) -> dict:
    ev = {"seq": seq, "tree": tree_id, "kind": kind, "at": time.time()}
    ev.update(fields)
    return ev


# --- state transition (shared by live mutation and replay) ---


def apply_event(tree: Tree | None, ev: dict) -> Tree:
    kind = ev["kind"]
    if kind == "tree_created":
        root = Node(
            id=ev["root"],
            parent=None,
            purpose=ev["title"],
            volatile=False,
            branch_point_index=0,
        )
        return Tree(id=ev["tree"], title=ev["title"], root=root.id, nodes={root.id: root})
    if tree is None:
        raise IntegrityError(f"event {ev['seq']} precedes tree creation")

    if kind == "branch_created":
        node = Node(
            id=ev["node"],
            parent=ev["parent"],
            purpose=ev["purpose"],
            volatile=ev["volatile"],
            branch_point_index=ev["branch_point"],
            window=Window(segments=[segment_from_dict(s) for s in ev["seeded"]]),
        )
        tree.nodes[node.id] = node
        tree.flows.append(FlowRecord("downstream", ev["parent"], node.id))
        tree.next_node += 1
    elif kind == "exchange_recorded":
        node = tree.nodes[ev["node"]]
        unit = Unit(
            id=ev["unit"],
            human=ev["human"],
            model=ev["model"],
            topic_tag=ev.get("topic_tag"),
            created_seq=tree.next_seq,
        )
        node.window.segments.append(NativeSegment(unit))
        tree.next_seq += 1
    elif kind == "node_merged":
        node = tree.nodes[ev["node"]]
        parent = tree.nodes[ev["parent"]]
        segments = [segment_from_dict(s) for s in ev["segments"]]
        insert_merged(
            parent.window, segments, ev["spec"]["position"], ev["branch_point"]
        )
        node.status = "merged"
        tree.flows.append(FlowRecord("upstream", node.id, parent.id))
    elif kind == "node_purged":
        node = tree.nodes[ev["node"]]
        node.window = Window()
        node.status = "purged"
    elif kind == "node_archived":
        tree.nodes[ev["node"]].status = "archived"
    elif kind == "cross_passed":
        dest = tree.nodes[ev["dest"]]
        dest.window.segments.extend(segment_from_dict(s) for s in ev["segments"])
        tree.flows.append(FlowRecord("cross", ev["source"], ev["dest"]))
    elif kind == "chunk_injected":
        node = tree.nodes[ev["node"]]
        seg = node.window.pending_chunks.pop(0)
        node.window.segments.append(seg)
    elif kind == "session_opened":
        tree.open_session = ev["session"]
        tree.next_session += 1
    elif kind == "session_closed":
        tree.open_session = None
    else:
        raise IntegrityError(f"unknown event kind {kind!r} at seq {ev['seq']}")
    return tree


# --- logs ---


class MemoryEventLog:
    """In-memory log with the same contract as the file log; used where
    durability is irrelevant (harness runs, randomized suites)."""

    def __init__(self):
        self.events: list[dict] = []
        self.last_seq = 0

    def append(self, event: dict) -> int:
        if event["seq"] != self.last_seq + 1:
            raise IntegrityError(
                f"sequence gap: expected {self.last_seq + 1}, got {event['seq']}"
            )
        self.events.append(event)
        self.last_seq = event["seq"]
        return self.last_seq

    def read(self) -> list[dict]:
        return list(self.events)


class FileEventLog:
    """Append-only JSONL log, fsynced before acknowledgment."""

    def __init__(self, path: Path | str, sync: bool = True):
        self.path = Path(path)
        self.sync = sync
        self.last_seq = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            for _, ev in iter_records(self.path):
                self.last_seq = ev["seq"]
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, event: dict) -> int:
        if event["seq"] != self.last_seq + 1:
            raise IntegrityError(
                f"sequence gap: expected {self.last_seq + 1}, got {event['seq']}"
            )
        self._fh.write(json.dumps(event, sort_keys=True) + "\n")
        self._fh.flush()
        if self.sync:
            os.fsync(self._fh.fileno())
        self.last_seq = event["seq"]
        return self.last_seq

    def read(self) -> list[dict]:
        self._fh.flush()
        return [ev for _, ev in iter_records(self.path)]

    def close(self) -> None:
        self._fh.close()


def iter_records(path: Path):
    """Yield (byte_offset, event) pairs, verifying the sequence chain."""
    offset = 0
    expected = 1
    with open(path, "rb") as fh:
        for raw in fh:
            stripped = raw.strip()
            if stripped:
                try:
                    ev = json.loads(stripped)
                except json.JSONDecodeError as exc:
                    raise IntegrityError(
                        f"corrupt record at byte offset {offset}: {exc}"
                    ) from exc
                if ev.get("seq") != expected:
                    raise IntegrityError(
                        f"sequence gap at byte offset {offset}: expected "
                        f"{expected}, got {ev.get('seq')}"
                    )
                expected += 1
                yield offset, ev
            offset += len(raw)


# --- replay ---


def replay_events(events) -> Tree | None:
    tree: Tree | None = None
    for ev in events:
        tree = apply_event(tree, ev)
    return tree


def replay(log) -> Tree | None:
    """Rebuild a tree from a log object (file or memory)."""
    return replay_events(log.read())


def replay_file(path: Path | str) -> Tree | None:
    return replay_events(ev for _, ev in iter_records(Path(path)))


def replay_dir(data_dir: Path | str) -> dict[str, Tree]:
    """Rebuild every tree under a data directory; empty dir means no trees."""
    trees: dict[str, Tree] = {}
    root = Path(data_dir)
    if not root.exists():
        return trees
    for tree_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        log_path = tree_dir / EVENTS_FILE
        if log_path.exists():
            tree = replay_file(log_path)
            if tree is not None:
                trees[tree.id] = tree
    return trees


# --- purge compaction ---


def _blank_payload(segments: list[dict]) -> list[dict]:
    out = []
    for seg in segments:
        seg = dict(seg)
        if seg.get("kind") == "native":
            unit = dict(seg["unit"])
            unit["human"] = ""
            unit["model"] = ""
            seg["unit"] = unit
        else:
            seg["payload"] = [
                {**m, "text": ""} for m in seg.get("payload", [])
            ]
        out.append(seg)
    return out


def redact_event(ev: dict, node_id: str) -> dict:
    """Blank every text field whose content lands in node_id's window.

    Content the user moved elsewhere before the purge (cross-passed out,
    seeded into a surviving child) is that window's content now and is kept,
    which is what makes replay of the compacted log match the original.
    """
    kind = ev["kind"]
    ev = dict(ev)
    if kind == "exchange_recorded" and ev["node"] == node_id:
        ev["human"] = ""
        ev["model"] = ""
        ev["redacted"] = True
    elif kind == "branch_created" and ev["node"] == node_id:
        ev["seeded"] = _blank_payload(ev["seeded"])
        ev["redacted"] = True
    elif kind == "cross_passed" and ev["dest"] == node_id:
        ev["segments"] = _blank_payload(ev["segments"])
        ev["redacted"] = True
    elif kind == "node_merged" and ev["parent"] == node_id:
        ev["segments"] = _blank_payload(ev["segments"])
        ev["redacted"] = True
    elif kind == "chunk_injected" and ev["node"] == node_id:
        ev["payload"] = [{**m, "text": ""} for m in ev["payload"]]
        ev["redacted"] = True
    return ev


def compact_purge(log: FileEventLog, node_id: str) -> Path:
    """Rewrite the log with the purged node's content removed.

    Copy-compact-rename: the redacted log is written beside the original and
    atomically swapped in, then the log handle is reopened.
    """
    events = log.read()
    if not any(ev["kind"] == "node_purged" and ev["node"] == node_id for ev in events):
        raise ContractError(f"node {node_id} has no purge event; nothing to compact")
    tmp = log.path.with_suffix(".compact")
    with open(tmp, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(redact_event(ev, node_id), sort_keys=True) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    log._fh.close()
    os.replace(tmp, log.path)
    log._fh = open(log.path, "a", encoding="utf-8")
    return log.path
