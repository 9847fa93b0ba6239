"""Command-line interface.

Mirrors the HTTP API 1:1. By default it runs offline, driving the engine
directly against a local data directory; with ``--url`` it talks to a
running server instead. Provider settings come from the CTREE_* env vars.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from ctree.engine import Engine
from ctree.errors import CtreeError, TransportError, ValidationError
from ctree.flow import CrossPolicy, DownstreamPolicy, MergeSpec, Selection
from ctree.provider import HttpProvider, MockProvider, ProviderConfig
from ctree.service import ServiceConfig, serve


def parse_policy(text: str) -> DownstreamPolicy:
    """full | none | last-k:K | select:id1,id2 | summarize:BUDGET"""
    kind, _, arg = text.partition(":")
    kind = kind.replace("-", "_")
    if kind in ("full", "none"):
        return DownstreamPolicy(kind)
    if kind == "last_k":
        return DownstreamPolicy("last_k", k=int(arg))
    if kind == "select":
        return DownstreamPolicy("select", ids=frozenset(arg.split(",")))
    if kind == "summarize":
        return DownstreamPolicy("summarize", budget=int(arg))
    raise ValidationError(f"unknown policy {text!r}")


def parse_selection(text: str) -> Selection:
    """all | select:id1,id2 | summarize:BUDGET"""
    kind, _, arg = text.partition(":")
    if kind == "all":
        return Selection("all")
    if kind == "select":
        return Selection("select", ids=frozenset(arg.split(",")))
    if kind == "summarize":
        return Selection("summarize", budget=int(arg))
    raise ValidationError(f"unknown selection {text!r}")


def parse_position(text: str) -> tuple[str, int | None]:
    """end | branch-point | chunked:K"""
    kind, _, arg = text.partition(":")
    kind = kind.replace("-", "_")
    if kind in ("end", "branch_point"):
        return kind, None
    if kind == "chunked":
        return "chunked", int(arg)
    raise ValidationError(f"unknown position {text!r}")


class OfflineClient:
    def __init__(self, data_dir: Path, provider_kind: str):
        provider = (
            MockProvider()
            if provider_kind == "mock"
            else HttpProvider(ProviderConfig.from_env())
        )
        self.engine = Engine(data_dir, provider=provider)

    def create_tree(self, title):
        return {"id": self.engine.create_tree(title)}

    def create_branch(self, tree, parent, purpose, volatile, policy):
        return {
            "id": self.engine.create_branch(
                tree, parent, purpose, volatile, DownstreamPolicy.from_dict(policy)
            )
        }

    def post_message(self, tree, node, human):
        return self.engine.post_message(tree, node, human)

    def transcript(self, tree, node):
        return self.engine.transcript(tree, node)

    def topology(self, tree):
        return self.engine.topology(tree)

    def delete_node(self, tree, node, disposition, spec):
        parsed = MergeSpec.from_dict(spec) if spec is not None else None
        return self.engine.delete_node(tree, node, disposition, parsed)

    def cross_pass(self, tree, source, dest, policy):
        return self.engine.cross_pass(tree, source, dest, CrossPolicy.from_dict(policy))

    def open_session(self, tree):
        return {"id": self.engine.open_session(tree)}

    def close_session(self, tree, session):
        return self.engine.close_session(tree, session)


class HttpClient:
    def __init__(self, url: str):
        self.http = httpx.Client(base_url=url, timeout=60)

    def _call(self, method, path, body=None):
        resp = self.http.request(method, path, json=body)
        data = resp.json()
        if resp.status_code >= 400:
            err = data.get("error", {})
            raise TransportError(
                err.get("message", resp.text), detail=err.get("code")
            )
        return data

    def create_tree(self, title):
        return self._call("POST", "/trees", {"title": title})

    def create_branch(self, tree, parent, purpose, volatile, policy):
        return self._call(
            "POST",
            f"/trees/{tree}/nodes",
            {"parent": parent, "purpose": purpose, "volatile": volatile, "policy": policy},
        )

    def post_message(self, tree, node, human):
        return self._call(
            "POST", f"/trees/{tree}/nodes/{node}/messages", {"human": human}
        )

    def transcript(self, tree, node):
        return self._call("GET", f"/trees/{tree}/nodes/{node}/transcript")

    def topology(self, tree):
        return self._call("GET", f"/trees/{tree}/topology")

    def delete_node(self, tree, node, disposition, spec):
        return self._call(
            "DELETE",
            f"/trees/{tree}/nodes/{node}",
            {"disposition": disposition, "spec": spec},
        )

    def cross_pass(self, tree, source, dest, policy):
        return self._call(
            "POST",
            f"/trees/{tree}/passes",
            {"source": source, "dest": dest, "policy": policy},
        )

    def open_session(self, tree):
        return self._call("POST", f"/trees/{tree}/sessions")

    def close_session(self, tree, session):
        return self._call("DELETE", f"/trees/{tree}/sessions/{session}")


@click.group()
@click.option(
    "--data",
    "-d",
    envvar="CTREE_DATA",
    default="./ctree-data",
    type=click.Path(path_type=Path),
    help="Local data directory (offline mode).",
)
@click.option("--url", default=None, help="Server URL; switches to server mode.")
@click.option(
    "--provider",
    type=click.Choice(["mock", "http"]),
    default="mock",
    help="Completion backend for offline mode.",
)
@click.pass_context
def main(ctx, data, url, provider):
    """Tree-structured conversations from the terminal."""
    ctx.obj = HttpClient(url) if url else OfflineClient(data, provider)


def _run(fn):
    try:
        result = fn()
    except CtreeError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.argument("title")
@click.pass_obj
def new(client, title):
    """Create a tree."""
    _run(lambda: client.create_tree(title))


@main.command()
@click.argument("tree")
@click.argument("parent")
@click.option("--purpose", default="")
@click.option("--volatile", is_flag=True)
@click.option("--policy", default="none", help="full|none|last-k:K|select:IDS|summarize:B")
@click.pass_obj
def branch(client, tree, parent, purpose, volatile, policy):
    """Create a child node."""
    _run(
        lambda: client.create_branch(
            tree, parent, purpose, volatile, parse_policy(policy).summary()
        )
    )


@main.command()
@click.argument("tree")
@click.argument("node")
@click.argument("text")
@click.pass_obj
def say(client, tree, node, text):
    """Send a message to a node and print the exchange."""
    _run(lambda: client.post_message(tree, node, text))


@main.command()
@click.argument("tree")
@click.argument("node")
@click.pass_obj
def show(client, tree, node):
    """Print a node's transcript with provenance."""
    _run(lambda: client.transcript(tree, node))


@main.command(name="tree")
@click.argument("tree_id")
@click.pass_obj
def tree_cmd(client, tree_id):
    """Print tree topology: nodes, edges, and flow events."""
    _run(lambda: client.topology(tree_id))


@main.command()
@click.argument("tree")
@click.argument("node")
@click.option("--merge", "disposition", flag_value="merge")
@click.option("--purge", "disposition", flag_value="purge")
@click.option("--archive", "disposition", flag_value="archive")
@click.option("--selection", default="all", help="all|select:IDS|summarize:B")
@click.option("--position", default="end", help="end|branch-point|chunked:K")
@click.pass_obj
def delete(client, tree, node, disposition, selection, position):
    """Delete a node with an explicit disposition."""

    def go():
        spec = None
        if disposition == "merge":
            pos, k = parse_position(position)
            spec = {"selection": parse_selection(selection).summary(), "position": pos}
            if k is not None:
                spec["chunks"] = k
        return client.delete_node(tree, node, disposition, spec)

    _run(go)


@main.command(name="pass")
@click.argument("tree")
@click.argument("source")
@click.argument("dest")
@click.option("--selection", default="all", help="all|select:IDS|summarize:B")
@click.pass_obj
def pass_cmd(client, tree, source, dest, selection):
    """Pass context laterally between two nodes."""
    _run(
        lambda: client.cross_pass(
            tree, source, dest, {"selection": parse_selection(selection).summary()}
        )
    )


@main.command()
@click.argument("tree")
@click.pass_obj
def close(client, tree):
    """End the tree's session; refused while volatile nodes are unresolved."""

    def go():
        session = client.topology(tree).get("open_session")
        if session is None:
            session = client.open_session(tree)["id"]
        return client.close_session(tree, session)

    _run(go)


@main.command(name="serve")
@click.option("--port", default=8787, type=int)
@click.option("--host", default="127.0.0.1")
@click.option(
    "--data",
    envvar="CTREE_DATA",
    default="./ctree-data",
    type=click.Path(path_type=Path),
)
@click.option("--provider", type=click.Choice(["mock", "http"]), default="mock")
def serve_cmd(port, host, data, provider):
    """Run the HTTP service."""
    serve(ServiceConfig(port=port, host=host, data_dir=data, provider=provider))
