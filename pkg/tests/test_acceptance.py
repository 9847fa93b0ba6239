"""Acceptance suite: one test per release criterion, each with its stated
bound, against independent oracles. Prints one PASS line per criterion."""

from __future__ import annotations

import random
import time
from pathlib import Path

from ctree.analysis import load_workload, replay_workload
from ctree.engine import Engine
from ctree.errors import ValidationError, VolatilityError
from ctree.flow import (
    CrossPolicy,
    DownstreamPolicy,
    MergeSpec,
    Selection,
    merge_eligible,
    upstream_merge,
)
from ctree.model import (
    ImportedSegment,
    Msg,
    NativeSegment,
    Unit,
    Window,
    flatten_window,
)
from ctree.persistence import EVENTS_FILE, canonical_snapshot, replay_file
from ctree.provider import MockProvider

FIXTURES = Path(__file__).parent / "fixtures"


def ack(name: str) -> None:
    print(f"[PASS] {name}")


# --- 1. isolation suite ---------------------------------------------------


def _random_sequence(rng: random.Random) -> None:
    engine = Engine()
    t = engine.create_tree("iso")
    root = engine.topology(t)["root"]
    taint: dict[str, set[str]] = {root: set()}
    origin: dict[str, list[str]] = {root: []}
    tree = engine._handles[t].tree
    counter = 0

    def active_nodes():
        return [n.id for n in tree.nodes.values() if n.active]

    for _ in range(rng.randint(6, 18)):
        op = rng.choices(
            ["branch", "exchange", "merge", "pass"], weights=[3, 5, 2, 2]
        )[0]
        if op == "branch":
            parent = rng.choice(active_nodes())
            policy = rng.choice(
                [
                    DownstreamPolicy("none"),
                    DownstreamPolicy("full"),
                    DownstreamPolicy("last_k", k=rng.randint(1, 3)),
                ]
            )
            child = engine.create_branch(t, parent, "p", rng.random() < 0.3, policy)
            taint[child] = (
                set() if policy.kind == "none" else taint[parent] | {parent}
            )
            origin[child] = []
        elif op == "exchange":
            node = rng.choice(active_nodes())
            counter += 1
            h, r = f"h-{node}-{counter}", f"r-{node}-{counter}"
            engine.record_exchange(t, node, h, r)
            origin[node] += [h, r]
        elif op == "merge":
            candidates = [
                n
                for n in active_nodes()
                if n != root
                and not any(c.active for c in tree.children(n))
                and merge_eligible(tree.nodes[n].window)
            ]
            if not candidates:
                continue
            node = rng.choice(candidates)
            parent = tree.nodes[node].parent
            position = rng.choice(["end", "branch_point", "chunked"])
            spec = MergeSpec(
                Selection("all"),
                position,
                chunks=rng.randint(1, 3) if position == "chunked" else None,
            )
            engine.delete_node(t, node, "merge", spec)
            taint[parent] |= taint[node] | {node}
        else:
            nodes = active_nodes()
            if len(nodes) < 2:
                continue
            src, dst = rng.sample(nodes, 2)
            if not flatten_window(tree.nodes[src].window):
                continue
            engine.cross_pass(t, src, dst, CrossPolicy(Selection("all")))
            taint[dst] |= taint[src] | {src}

    # every sibling pair with no connecting flow shares nothing
    by_parent: dict[str, list[str]] = {}
    for n in tree.nodes.values():
        if n.active and n.parent is not None:
            by_parent.setdefault(n.parent, []).append(n.id)
    for siblings in by_parent.values():
        for i, x in enumerate(siblings):
            for y in siblings[i + 1 :]:
                if x in taint[y] or y in taint[x]:
                    continue
                texts_x = {m.text for m in engine.assemble_context(t, x, "probe")}
                texts_y = {m.text for m in engine.assemble_context(t, y, "probe")}
                assert texts_x.isdisjoint(origin[y]), (x, y)
                assert texts_y.isdisjoint(origin[x]), (x, y)


def test_isolation_suite():
    rng = random.Random(20250823)
    start = time.monotonic()
    for _ in range(1000):
        _random_sequence(rng)
    elapsed = time.monotonic() - start
    assert elapsed < 30, f"isolation suite took {elapsed:.1f}s"
    ack(f"isolation suite: 1000 randomized sequences in {elapsed:.1f}s")


# --- 2/3. merge oracle equivalence and chunked conservation ---------------


def _random_window(rng: random.Random, tag: str) -> Window:
    segs = []
    seq = rng.randint(1, 5)
    for i in range(rng.randint(0, 5)):
        if rng.random() < 0.75:
            segs.append(
                NativeSegment(
                    Unit(f"{tag}-u{seq}", f"{tag}-h{seq}", f"{tag}-r{seq}", None, seq)
                )
            )
            seq += rng.randint(1, 2)
        else:
            flow = rng.choice(["downstream", "cross", "chunk"])
            segs.append(
                ImportedSegment(
                    [Msg("human", f"{tag}-imp{i}-{j}") for j in range(rng.randint(1, 3))],
                    "other",
                    flow,
                )
            )
    return Window(segments=segs)


def _ref_eligible(child: Window) -> list[tuple[str, str]]:
    out = []
    for seg in child.segments:
        if isinstance(seg, NativeSegment):
            out += [("human", seg.unit.human), ("model", seg.unit.model)]
        elif seg.flow == "chunk":
            out += [(m.role, m.text) for m in seg.payload]
    return out


def _ref_select(child: Window, ids: frozenset[str]) -> list[tuple[str, str]]:
    units = sorted(
        (s.unit for s in child.segments if isinstance(s, NativeSegment) and s.unit.id in ids),
        key=lambda u: u.created_seq,
    )
    return [m for u in units for m in (("human", u.human), ("model", u.model))]


def _ref_chunks(payload: list, k: int) -> list[list]:
    m = len(payload)
    k = min(k, m)
    return [payload[m * i // k : m * (i + 1) // k] for i in range(k)]


def _window_as_payloads(w: Window) -> list[list[tuple[str, str]]]:
    out = []
    for seg in w.segments:
        if isinstance(seg, NativeSegment):
            out.append([("human", seg.unit.human), ("model", seg.unit.model)])
        else:
            out.append([(m.role, m.text) for m in seg.payload])
    return out


def _random_merge_case(rng: random.Random):
    parent = _random_window(rng, "p")
    child = _random_window(rng, "c")
    branch_point = rng.randint(0, len(parent.segments))
    native_ids = [u.id for u in child.native_units()]
    if native_ids and rng.random() < 0.3:
        chosen = frozenset(rng.sample(native_ids, rng.randint(1, len(native_ids))))
        selection = Selection("select", ids=chosen)
        payload = _ref_select(child, chosen)
    else:
        selection = Selection("all")
        payload = _ref_eligible(child)
    position = rng.choice(["end", "branch_point", "chunked"])
    k = rng.randint(1, 4) if position == "chunked" else None
    spec = MergeSpec(selection, position, chunks=k)
    return parent, child, branch_point, spec, payload


def test_merge_oracle_equivalence():
    rng = random.Random(777)
    start = time.monotonic()
    checked = 0
    while checked < 500:
        parent, child, bp, spec, payload = _random_merge_case(rng)
        if not payload:
            try:
                upstream_merge(parent, child, spec, bp, "c")
            except ValidationError:
                continue
            raise AssertionError("empty selection must be rejected")
        merged = upstream_merge(parent, child, spec, bp, "c")
        expected = _window_as_payloads(parent)
        if spec.position == "end":
            expected = expected + [payload]
        elif spec.position == "branch_point":
            expected = expected[:bp] + [payload] + expected[bp:]
        actual = _window_as_payloads(merged)
        assert actual == expected, (spec, bp)
        if spec.position == "chunked":
            expected_chunks = _ref_chunks(payload, spec.chunks)
            actual_chunks = [
                [(m.role, m.text) for m in seg.payload] for seg in merged.pending_chunks
            ]
            assert actual_chunks == expected_chunks
        checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 10, f"merge oracle suite took {elapsed:.1f}s"
    ack(f"merge oracle equivalence: 500 cases in {elapsed:.1f}s")


def test_chunked_conservation():
    rng = random.Random(778)
    checked = 0
    while checked < 200:
        child = _random_window(rng, "c")
        payload = _ref_eligible(child)
        if not payload:
            continue
        parent = _random_window(rng, "p")
        k = rng.randint(1, 5)
        end = upstream_merge(
            parent, child, MergeSpec(Selection("all"), "end"), 0, "c"
        )
        chunked = upstream_merge(
            parent, child, MergeSpec(Selection("all"), "chunked", chunks=k), 0, "c"
        )
        end_payload = [(m.role, m.text) for m in end.segments[-1].payload]
        concat = [
            (m.role, m.text) for seg in chunked.pending_chunks for m in seg.payload
        ]
        assert concat == end_payload
        checked += 1
    ack("chunked conservation: 200 cases, concatenated chunks == end-append payload")


# --- 4. volatile lifecycle ------------------------------------------------


def test_volatile_lifecycle(tmp_path):
    engine = Engine(tmp_path, provider=MockProvider())
    t = engine.create_tree("vol", tree_id="vol")
    root = "vol.n0"
    v = engine.create_branch(t, root, "scratch", True, DownstreamPolicy("none"))
    engine.record_exchange(t, v, "classified-material-xyz", "classified-reply-abc")

    try:
        engine.delete_node(t, v, None)
        raise AssertionError("missing disposition must be rejected")
    except ValidationError:
        pass
    try:
        engine.delete_node(t, v, "archive")
        raise AssertionError("archive of a volatile node must be rejected")
    except VolatilityError:
        pass

    session = engine.open_session(t)
    refusal = engine.close_session(t, session)
    assert refusal == {"closed": False, "unresolved_volatile": [v]}

    engine.delete_node(t, v, "purge")  # purge auto-compacts the log
    data = (tmp_path / t / EVENTS_FILE).read_bytes()
    for secret in ("classified-material-xyz", "classified-reply-abc"):
        for i in range(len(secret) - 7):
            assert secret[i : i + 8].encode() not in data

    assert engine.close_session(t, session)["closed"] is True
    ack("volatile lifecycle: dispositions enforced, close blocked, purge redacted")


# --- 5. persistence round-trip --------------------------------------------


def _random_session(engine: Engine, rng: random.Random, tree_id: str) -> str:
    t = engine.create_tree("rt", tree_id=tree_id)
    root = engine.topology(t)["root"]
    tree = engine._handles[t].tree
    for step in range(rng.randint(4, 14)):
        op = rng.choices(
            ["branch", "exchange", "merge", "pass", "purge"], weights=[3, 5, 2, 2, 1]
        )[0]
        active = [n.id for n in tree.nodes.values() if n.active]
        if op == "branch":
            engine.create_branch(
                t,
                rng.choice(active),
                "p",
                rng.random() < 0.3,
                rng.choice([DownstreamPolicy("none"), DownstreamPolicy("full")]),
            )
        elif op == "exchange":
            engine.record_exchange(
                t, rng.choice(active), f"h{step}-{rng.random()}", f"r{step}"
            )
        elif op == "merge":
            candidates = [
                n
                for n in active
                if n != root
                and not any(c.active for c in tree.children(n))
                and merge_eligible(tree.nodes[n].window)
            ]
            if candidates:
                position = rng.choice(["end", "branch_point", "chunked"])
                engine.delete_node(
                    t,
                    rng.choice(candidates),
                    "merge",
                    MergeSpec(
                        Selection("all"),
                        position,
                        chunks=2 if position == "chunked" else None,
                    ),
                )
        elif op == "pass":
            if len(active) >= 2:
                src, dst = rng.sample(active, 2)
                if flatten_window(tree.nodes[src].window):
                    engine.cross_pass(t, src, dst, CrossPolicy(Selection("all")))
        else:
            candidates = [
                n
                for n in active
                if n != root and not any(c.active for c in tree.children(n))
            ]
            if candidates:
                engine.delete_node(t, rng.choice(candidates), "purge")
    return t


def test_persistence_round_trip(tmp_path):
    rng = random.Random(999)
    start = time.monotonic()
    engine = Engine(tmp_path, provider=MockProvider(), sync=False)
    for i in range(100):
        t = _random_session(engine, rng, f"rt{i:03d}")
        live = engine.snapshot(t)
        replayed = canonical_snapshot(replay_file(tmp_path / t / EVENTS_FILE))
        assert replayed == live, t
    elapsed = time.monotonic() - start
    assert elapsed < 20, f"round-trip suite took {elapsed:.1f}s"
    ack(f"persistence round-trip: 100 randomized sessions in {elapsed:.1f}s")


# --- 6/7. harness formulas -------------------------------------------------


def test_linear_baseline_formula():
    steps = []
    for n in range(20):
        body = f"s{n:02d}".ljust(20, "x")  # 20 chars = 5 tokens
        steps.append({"topic": "only", "human": body, "model": body[::-1]})
    from ctree.analysis import workload_from_dict

    report = replay_workload(
        workload_from_dict(
            {"topics": ["only"], "steps": steps, "structure": "linear"}
        )
    )
    expected = sum((2 * (n - 1) + 1) * 5 for n in range(1, 21))
    assert expected == 2000
    assert report.total_submitted_tokens == 2000
    ack("linear-baseline formula: 20 uniform steps total exactly 2000 tokens")


def test_context_efficiency_demonstration():
    linear = replay_workload(load_workload(FIXTURES / "workload_linear.json"))
    tree = replay_workload(load_workload(FIXTURES / "workload_tree.json"))

    # closed-form oracle: 30 interleaved steps of 5-token messages vs three
    # independent 10-step threads
    expected_linear = sum((2 * (n - 1) + 1) * 5 for n in range(1, 31))
    expected_tree = 3 * sum((2 * (n - 1) + 1) * 5 for n in range(1, 11))
    assert linear.total_submitted_tokens == expected_linear
    assert tree.total_submitted_tokens == expected_tree
    ratio = tree.total_submitted_tokens / linear.total_submitted_tokens
    assert ratio < 0.5

    # contamination oracle: at global step n (0-based, strict 3-topic
    # alternation), prior foreign steps number n - n // 3
    expected_foreign = sum(2 * (n - n // 3) * 5 for n in range(30))
    assert tree.contamination_fraction == 0.0
    assert linear.contamination_fraction == expected_foreign / expected_linear
    assert linear.contamination_fraction > 0.0
    ack(
        f"context efficiency: ratio {ratio:.3f} < 0.5, tree contamination 0, "
        f"linear contamination {linear.contamination_fraction:.3f}"
    )


# --- 8. representative tree fixture ----------------------------------------


def test_fig_fixture(fig_tree):
    engine, t, nodes = fig_tree
    topo = engine.topology(t)
    assert len(topo["nodes"]) == 6
    assert len(topo["edges"]) == 5
    volatile = {n["id"] for n in topo["nodes"] if n["volatile"]}
    assert volatile == {nodes["A2"], nodes["B1"]}
    engine.delete_node(t, nodes["A2"], "merge", MergeSpec(Selection("all"), "end"))
    engine.delete_node(
        t, nodes["B1"], "merge", MergeSpec(Selection("all"), "branch_point")
    )
    upstream = [f for f in engine.topology(t)["flows"] if f["kind"] == "upstream"]
    assert len(upstream) == 2
    ack("representative tree: 6 nodes, 5 edges, 2 volatile, 2 upstream merges")


# --- 9. mock provider determinism ------------------------------------------


def test_mock_determinism():
    fixture = [
        Msg("human", "first question"),
        Msg("model", "first answer"),
        Msg("human", "second question"),
    ]
    base = MockProvider().complete(fixture)
    assert base == MockProvider().complete(list(fixture))
    for i in range(len(fixture)):
        perturbed = [
            Msg(m.role, m.text + "!") if j == i else m for j, m in enumerate(fixture)
        ]
        other = MockProvider().complete(perturbed)
        assert other.rsplit(":", 1)[1] != base.rsplit(":", 1)[1], i
    ack("mock determinism: stable outputs, any perturbation changes hash suffix")
