"""Token-efficiency experiment: one multi-topic session replayed linearly
and tree-structured, with per-policy totals.

Run: python3 scripts/efficiency_experiment.py [topics] [rounds]
"""

from __future__ import annotations

import sys

from ctree.analysis import compare, render_comparison, replay_workload, workload_from_dict


def make_steps(topics: list[str], rounds: int) -> list[dict]:
    steps = []
    for r in range(rounds):
        for topic in topics:
            body = f"{topic} round {r}: twenty chars pad".ljust(40, ".")
            steps.append({"topic": topic, "human": body, "model": body[::-1]})
    return steps


def main() -> None:
    n_topics = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    rounds = int(sys.argv[2]) if len(sys.argv) > 2 else 10
    topics = [f"topic{i}" for i in range(n_topics)]
    steps = make_steps(topics, rounds)

    linear = workload_from_dict(
        {"topics": topics, "steps": steps, "structure": "linear"}
    )
    for policy in ({"kind": "none"}, {"kind": "full"}, {"kind": "last_k", "k": 2}):
        tree = workload_from_dict(
            {
                "topics": topics,
                "steps": steps,
                "structure": "tree",
                "plan": {t: {"parent": "root", "policy": policy} for t in topics},
            }
        )
        print(f"--- downstream policy: {policy}")
        print(render_comparison(compare(linear, tree)))
        print()


if __name__ == "__main__":
    main()
