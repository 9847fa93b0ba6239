"""Context flow between nodes: downstream seeding, upstream merging,
lateral passing, token estimation, and provider-backed summarization.

All flow functions are pure over window values; the engine applies their
results under the per-tree mutation lock and records them as events.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Literal

from ctree.errors import ConfigurationError, StructuralError, ValidationError
from ctree.model import (
    ImportedSegment,
    Msg,
    NativeSegment,
    Window,
    flatten_segment,
    flatten_window,
)

SUMMARY_SYSTEM_PROMPT = (
    "Condense the following conversation excerpts into a brief factual summary."
)


# --- policies ---


@dataclass
class DownstreamPolicy:
    """How a child window is seeded from the parent at branch time."""

    kind: Literal["none", "full", "last_k", "select", "summarize"]
    k: int | None = None
    ids: frozenset[str] | None = None
    budget: int | None = None

    def __post_init__(self):
        if self.kind == "last_k" and (self.k is None or self.k < 1):
            raise ValidationError("last_k requires k >= 1")
        if self.kind == "select" and not self.ids:
            raise ValidationError("select requires a non-empty id set")
        if self.kind == "summarize" and (self.budget is None or self.budget < 1):
            raise ValidationError("summarize requires budget >= 1")

    def summary(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.k is not None:
            d["k"] = self.k
        if self.ids is not None:
            d["ids"] = sorted(self.ids)
        if self.budget is not None:
            d["budget"] = self.budget
        return d

    @staticmethod
    def from_dict(d: dict) -> "DownstreamPolicy":
        return DownstreamPolicy(
            kind=d["kind"],
            k=d.get("k"),
            ids=frozenset(d["ids"]) if d.get("ids") is not None else None,
            budget=d.get("budget"),
        )


@dataclass
class Selection:
    """Content choice shared by merge specs and cross-pass policies."""

    kind: Literal["all", "select", "summarize"]
    ids: frozenset[str] | None = None
    budget: int | None = None

    def __post_init__(self):
        if self.kind == "select" and not self.ids:
            raise ValidationError("select requires a non-empty id set")
        if self.kind == "summarize" and (self.budget is None or self.budget < 1):
            raise ValidationError("summarize requires budget >= 1")

    def summary(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.ids is not None:
            d["ids"] = sorted(self.ids)
        if self.budget is not None:
            d["budget"] = self.budget
        return d

    @staticmethod
    def from_dict(d: dict) -> "Selection":
        return Selection(
            kind=d["kind"],
            ids=frozenset(d["ids"]) if d.get("ids") is not None else None,
            budget=d.get("budget"),
        )


@dataclass
class MergeSpec:
    selection: Selection
    position: Literal["end", "branch_point", "chunked"]
    chunks: int | None = None

    def __post_init__(self):
        if self.position == "chunked" and (self.chunks is None or self.chunks < 1):
            raise ValidationError("chunked requires chunks >= 1")

    def summary(self) -> dict:
        d: dict = {"selection": self.selection.summary(), "position": self.position}
        if self.chunks is not None:
            d["chunks"] = self.chunks
        return d

    @staticmethod
    def from_dict(d: dict) -> "MergeSpec":
        return MergeSpec(
            selection=Selection.from_dict(d["selection"]),
            position=d["position"],
            chunks=d.get("chunks"),
        )


@dataclass
class CrossPolicy:
    """Lateral transfer spec; destination insertion is always end-append."""

    selection: Selection

    def summary(self) -> dict:
        return {"selection": self.selection.summary()}

    @staticmethod
    def from_dict(d: dict) -> "CrossPolicy":
        return CrossPolicy(selection=Selection.from_dict(d["selection"]))


# --- token estimation ---


def estimate_tokens(content: str) -> int:
    """Deterministic provider-neutral estimate: ceil(chars / 4)."""
    return math.ceil(len(content) / 4)


def estimate_messages(messages: list[Msg]) -> int:
    return sum(estimate_tokens(m.text) for m in messages)


# --- summarization ---


def summarize(messages: list[Msg], budget: int, provider) -> str:
    """Condense messages via one provider completion, truncated to budget."""
    if not messages:
        raise ValidationError("cannot summarize an empty sequence")
    if provider is None:
        raise ConfigurationError("summarization requires a configured provider")
    excerpt = "\n".join(f"{m.role}: {m.text}" for m in messages)
    request = [
        Msg("system", SUMMARY_SYSTEM_PROMPT),
        Msg("human", excerpt),
    ]
    result = provider.complete(request)
    if estimate_tokens(result) > budget:
        result = result[: budget * 4]
    return result


# --- downstream passing ---


def downstream_select(
    source: Window, policy: DownstreamPolicy, source_node: str, provider=None
) -> list[ImportedSegment]:
    """Compute the imported segments that seed a child window."""
    if policy.kind == "none":
        return []
    if policy.kind == "full":
        payload = flatten_window(source)
        if not payload:
            return []
        return [ImportedSegment(payload, source_node, "downstream")]
    if policy.kind == "last_k":
        units = source.native_units()[-policy.k :]
        payload = [m for u in units for m in flatten_segment(NativeSegment(u))]
        if not payload:
            return []
        return [ImportedSegment(payload, source_node, "downstream")]
    if policy.kind == "select":
        payload = _select_units(source, policy.ids)
        return [ImportedSegment(payload, source_node, "downstream")]
    if policy.kind == "summarize":
        payload = flatten_window(source)
        if not payload:
            return []
        text = summarize(payload, policy.budget, provider)
        return [ImportedSegment([Msg("system", text)], source_node, "downstream")]
    raise ValidationError(f"unknown downstream policy {policy.kind!r}")


def _select_units(source: Window, ids: frozenset[str]) -> list[Msg]:
    by_id = {u.id: u for u in source.native_units()}
    missing = sorted(ids - set(by_id))
    if missing:
        raise ValidationError(f"unknown unit ids: {', '.join(missing)}")
    chosen = sorted((by_id[i] for i in ids), key=lambda u: u.created_seq)
    return [m for u in chosen for m in flatten_segment(NativeSegment(u))]


# --- upstream merging ---


def merge_eligible(child: Window) -> list[Msg]:
    """Child content eligible for upstream transfer: native exchanges plus
    chunk-injected content; segments the child imported from elsewhere stay out
    so a merge never re-duplicates inherited context."""
    out: list[Msg] = []
    for seg in child.segments:
        if isinstance(seg, NativeSegment) or seg.flow == "chunk":
            out.extend(flatten_segment(seg))
    return out


def _apply_selection(
    window: Window, eligible: list[Msg], selection: Selection, provider
) -> list[Msg]:
    if selection.kind == "all":
        payload = eligible
    elif selection.kind == "select":
        eligible_ids = {u.id for u in window.native_units()}
        missing = sorted(selection.ids - eligible_ids)
        if missing:
            raise ValidationError(f"unknown unit ids: {', '.join(missing)}")
        payload = _select_units(window, selection.ids)
    else:
        if not eligible:
            raise ValidationError("nothing to summarize")
        text = summarize(eligible, selection.budget, provider)
        payload = [Msg("system", text)]
    if not payload:
        raise ValidationError(
            "selection yields no content; use purge or archive instead"
        )
    return payload


def split_chunks(payload: list[Msg], k: int) -> list[list[Msg]]:
    """Split into at most k near-equal contiguous non-empty chunks."""
    m = len(payload)
    k = min(k, m)
    return [payload[m * i // k : m * (i + 1) // k] for i in range(k)]


def merge_segments(
    child: Window, spec: MergeSpec, child_node: str, provider=None
) -> list[ImportedSegment]:
    """Compute the segments an upstream merge transfers into the parent."""
    payload = _apply_selection(child, merge_eligible(child), spec.selection, provider)
    if spec.position == "chunked":
        return [
            ImportedSegment(chunk, child_node, "chunk")
            for chunk in split_chunks(payload, spec.chunks)
        ]
    return [ImportedSegment(payload, child_node, "upstream")]


def insert_merged(
    parent: Window,
    segments: list[ImportedSegment],
    position: str,
    branch_point: int,
) -> None:
    """Apply transferred segments to the parent window in place."""
    if branch_point > len(parent.segments):
        raise StructuralError(
            f"branch point {branch_point} exceeds parent window length "
            f"{len(parent.segments)}"
        )
    if position == "end":
        parent.segments.extend(segments)
    elif position == "branch_point":
        parent.segments[branch_point:branch_point] = segments
    elif position == "chunked":
        parent.pending_chunks.extend(segments)
    else:
        raise ValidationError(f"unknown merge position {position!r}")


def upstream_merge(
    parent: Window,
    child: Window,
    spec: MergeSpec,
    branch_point: int,
    child_node: str = "child",
    provider=None,
) -> Window:
    """Pure form: return the parent window after merging child content."""
    if branch_point > len(parent.segments):
        raise StructuralError(
            f"branch point {branch_point} exceeds parent window length "
            f"{len(parent.segments)}"
        )
    segments = merge_segments(child, spec, child_node, provider)
    result = copy.deepcopy(parent)
    insert_merged(result, segments, spec.position, branch_point)
    return result


# --- cross-node passing ---


def cross_segments(
    source: Window, policy: CrossPolicy, source_node: str, provider=None
) -> list[ImportedSegment]:
    """Compute the segments a lateral pass appends to the destination."""
    payload = _apply_selection(
        source, flatten_window(source), policy.selection, provider
    )
    return [ImportedSegment(payload, source_node, "cross")]


def cross_pass(
    source: Window,
    dest: Window,
    policy: CrossPolicy,
    source_node: str = "source",
    provider=None,
) -> Window:
    """Pure form: return the destination window after a lateral pass."""
    segments = cross_segments(source, policy, source_node, provider)
    result = copy.deepcopy(dest)
    result.segments.extend(segments)
    return result
