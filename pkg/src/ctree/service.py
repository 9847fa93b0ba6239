"""HTTP API over the engine.

Thin layer: every endpoint validates its body, calls one engine operation,
and returns the engine's result. Error bodies carry stable machine-readable
codes so clients (notably the companion UI) can branch on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ctree.engine import Engine
from ctree.errors import (
    ConfigurationError,
    ContractError,
    CtreeError,
    IntegrityError,
    LifecycleError,
    NotFoundError,
    StructuralError,
    TransportError,
    ValidationError,
    VolatilityError,
)
from ctree.flow import CrossPolicy, DownstreamPolicy, MergeSpec
from ctree.provider import HttpProvider, MockProvider, ProviderConfig

_STATUS = {
    ValidationError: 400,
    NotFoundError: 404,
    LifecycleError: 409,
    StructuralError: 409,
    VolatilityError: 409,
    ContractError: 409,
    ConfigurationError: 500,
    IntegrityError: 500,
    TransportError: 502,
}


class CreateTree(BaseModel):
    title: str


class CreateBranch(BaseModel):
    parent: str
    purpose: str = ""
    volatile: bool = False
    policy: dict = {"kind": "none"}


class PostMessage(BaseModel):
    human: str


class DeleteNode(BaseModel):
    disposition: str
    spec: dict | None = None


class CrossPass(BaseModel):
    source: str
    dest: str
    policy: dict


def _parse(parser, payload):
    try:
        return parser(payload)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed policy/spec: {exc}") from exc


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="ctree")
    app.state.engine = engine

    @app.exception_handler(CtreeError)
    async def _ctree_error(request: Request, exc: CtreeError):
        status = next(
            (code for cls, code in _STATUS.items() if isinstance(exc, cls)), 500
        )
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.post("/trees", status_code=201)
    def create_tree(body: CreateTree):
        tree_id = engine.create_tree(body.title)
        return {"id": tree_id, "title": body.title}

    @app.get("/trees")
    def list_trees():
        return {"trees": engine.list_trees()}

    @app.get("/trees/{tree_id}/topology")
    def topology(tree_id: str):
        return engine.topology(tree_id)

    @app.post("/trees/{tree_id}/nodes", status_code=201)
    def create_branch(tree_id: str, body: CreateBranch):
        policy = _parse(DownstreamPolicy.from_dict, body.policy)
        node_id = engine.create_branch(
            tree_id, body.parent, body.purpose, body.volatile, policy
        )
        return {"id": node_id}

    @app.post("/trees/{tree_id}/nodes/{node_id}/messages", status_code=201)
    def post_message(tree_id: str, node_id: str, body: PostMessage):
        return engine.post_message(tree_id, node_id, body.human)

    @app.get("/trees/{tree_id}/nodes/{node_id}/transcript")
    def transcript(tree_id: str, node_id: str):
        return engine.transcript(tree_id, node_id)

    @app.delete("/trees/{tree_id}/nodes/{node_id}")
    def delete_node(tree_id: str, node_id: str, body: DeleteNode = Body(...)):
        spec = _parse(MergeSpec.from_dict, body.spec) if body.spec is not None else None
        return engine.delete_node(tree_id, node_id, body.disposition, spec)

    @app.post("/trees/{tree_id}/passes", status_code=201)
    def cross_pass(tree_id: str, body: CrossPass):
        policy = _parse(CrossPolicy.from_dict, body.policy)
        return engine.cross_pass(tree_id, body.source, body.dest, policy)

    @app.post("/trees/{tree_id}/sessions", status_code=201)
    def open_session(tree_id: str):
        return {"id": engine.open_session(tree_id)}

    @app.delete("/trees/{tree_id}/sessions/{session_id}")
    def close_session(tree_id: str, session_id: str):
        return engine.close_session(tree_id, session_id)

    return app


@dataclass
class ServiceConfig:
    port: int = 8787
    host: str = "127.0.0.1"
    data_dir: Path = Path("./ctree-data")
    provider: str = "mock"  # "mock" or "http"


def build_engine(config: ServiceConfig) -> Engine:
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    if not data_dir.is_dir():
        raise ConfigurationError(f"data dir {data_dir} is not a directory")
    if config.provider == "mock":
        provider = MockProvider()
    else:
        provider = HttpProvider(ProviderConfig.from_env())
    return Engine(data_dir, provider=provider)


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(build_engine(config))
    uvicorn.run(app, host=config.host, port=config.port)
