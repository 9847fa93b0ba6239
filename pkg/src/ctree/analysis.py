"""Desk-scale evaluation harness.

Replays a scripted multi-topic workload under linear or tree structuring,
reporting submitted-token totals and a contamination fraction: the share of
assembled-context tokens whose topic tag differs from the current step's
topic. Scripted model texts keep runs deterministic and provider-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from ctree.errors import ValidationError
from ctree.flow import DownstreamPolicy, downstream_select, estimate_tokens
from ctree.model import Msg, NativeSegment, Unit, Window, flatten_window


@dataclass
class Step:
    topic: str
    human: str
    model: str


@dataclass
class BranchPlanEntry:
    parent: str  # "root" or another topic label
    policy: DownstreamPolicy


@dataclass
class Workload:
    topics: list[str]
    steps: list[Step]
    structure: Literal["linear", "tree"]
    plan: dict[str, BranchPlanEntry] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.topics:
            raise ValidationError("workload needs at least one topic")
        known = set(self.topics)
        for i, step in enumerate(self.steps):
            if step.topic not in known:
                raise ValidationError(f"step {i} topic {step.topic!r} not declared")
        if self.structure == "tree":
            missing = sorted(known - set(self.plan))
            if missing:
                raise ValidationError(
                    f"branch plan missing topics: {', '.join(missing)}"
                )
            for topic, entry in self.plan.items():
                if entry.parent != "root" and entry.parent not in known:
                    raise ValidationError(
                        f"plan for {topic!r} references unknown parent {entry.parent!r}"
                    )
        elif self.structure != "linear":
            raise ValidationError(f"unknown structure {self.structure!r}")


@dataclass
class EfficiencyReport:
    total_submitted_tokens: int
    per_step_tokens: list[int]
    contamination_fraction: float

    def to_dict(self) -> dict:
        return {
            "total_submitted_tokens": self.total_submitted_tokens,
            "per_step_tokens": self.per_step_tokens,
            "contamination_fraction": self.contamination_fraction,
        }


def workload_from_dict(d: dict) -> Workload:
    try:
        plan = {
            topic: BranchPlanEntry(
                parent=entry["parent"],
                policy=DownstreamPolicy.from_dict(entry["policy"]),
            )
            for topic, entry in d.get("plan", {}).items()
        }
        w = Workload(
            topics=list(d["topics"]),
            steps=[Step(s["topic"], s["human"], s["model"]) for s in d["steps"]],
            structure=d["structure"],
            plan=plan,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed workload: {exc}") from exc
    w.validate()
    return w


def load_workload(path: Path | str) -> Workload:
    with open(path, encoding="utf-8") as fh:
        return workload_from_dict(json.load(fh))


class _SimTree:
    """Minimal window-per-topic simulation mirroring engine assembly."""

    def __init__(self, workload: Workload):
        self.workload = workload
        self.windows: dict[str, Window] = {"root": Window()}
        self.next_seq = 1

    def window_for(self, topic: str) -> Window:
        if self.workload.structure == "linear":
            return self.windows["root"]
        if topic not in self.windows:
            entry = self.workload.plan[topic]
            parent = self.window_for(entry.parent) if entry.parent != "root" else self.windows["root"]
            seeded = downstream_select(parent, entry.policy, entry.parent)
            self.windows[topic] = Window(segments=list(seeded))
        return self.windows[topic]

    def append(self, window: Window, step: Step) -> None:
        unit = Unit(
            id=f"u{self.next_seq}",
            human=step.human,
            model=step.model,
            topic_tag=step.topic,
            created_seq=self.next_seq,
        )
        window.segments.append(NativeSegment(unit))
        self.next_seq += 1


def replay_workload(workload: Workload) -> EfficiencyReport:
    workload.validate()
    sim = _SimTree(workload)
    per_step: list[int] = []
    foreign = 0
    total = 0
    for step in workload.steps:
        window = sim.window_for(step.topic)
        assembled = flatten_window(window) + [Msg("human", step.human, step.topic)]
        step_tokens = 0
        for msg in assembled:
            t = estimate_tokens(msg.text)
            step_tokens += t
            if msg.topic_tag is not None and msg.topic_tag != step.topic:
                foreign += t
        per_step.append(step_tokens)
        total += step_tokens
        sim.append(window, step)
    fraction = foreign / total if total > 0 else 0.0
    return EfficiencyReport(
        total_submitted_tokens=total,
        per_step_tokens=per_step,
        contamination_fraction=fraction,
    )


def compare(linear: Workload, tree: Workload) -> dict:
    if linear.structure != "linear" or tree.structure != "tree":
        raise ValidationError("compare expects a linear and a tree workload")
    if [(s.topic, s.human, s.model) for s in linear.steps] != [
        (s.topic, s.human, s.model) for s in tree.steps
    ]:
        raise ValidationError("workloads must share identical steps")
    linear_report = replay_workload(linear)
    tree_report = replay_workload(tree)
    ratio = (
        tree_report.total_submitted_tokens / linear_report.total_submitted_tokens
        if linear_report.total_submitted_tokens
        else 1.0
    )
    return {
        "linear": linear_report.to_dict(),
        "tree": tree_report.to_dict(),
        "token_ratio": ratio,
    }


def render_comparison(result: dict) -> str:
    lin, tre = result["linear"], result["tree"]
    lines = [
        f"{'':<12}{'tokens':>10}{'contamination':>16}",
        f"{'linear':<12}{lin['total_submitted_tokens']:>10}"
        f"{lin['contamination_fraction']:>16.4f}",
        f"{'tree':<12}{tre['total_submitted_tokens']:>10}"
        f"{tre['contamination_fraction']:>16.4f}",
        f"tree/linear token ratio: {result['token_ratio']:.4f}",
    ]
    return "\n".join(lines)
