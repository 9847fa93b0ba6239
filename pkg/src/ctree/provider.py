"""Chat-completion backends.

MockProvider is the deterministic test backend: its output hashes the whole
flattened transcript, so any context leak between nodes changes the response
and becomes test-detectable. HttpProvider speaks the common chat-completions
wire shape against any compatible endpoint, with retry/backoff.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass

import httpx

from ctree.errors import ConfigurationError, TransportError, ValidationError
from ctree.model import Msg

ENV_URL = "CTREE_PROVIDER_URL"
ENV_KEY = "CTREE_PROVIDER_KEY"
ENV_MODEL = "CTREE_MODEL"

_WIRE_ROLES = {"system": "system", "human": "user", "model": "assistant"}


def flatten_transcript(messages: list[Msg]) -> str:
    return "\n".join(f"{m.role}:{m.text}" for m in messages)


def fnv1a_32(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def _validate(messages: list[Msg]) -> Msg:
    if not messages:
        raise ValidationError("messages must be non-empty")
    last = messages[-1]
    if last.role != "human":
        raise ValidationError("final message must have role human")
    return last


class MockProvider:
    """Pure function of the transcript: echo of the final human message plus
    an 8-hex-digit FNV-1a hash of the full flattened transcript."""

    def complete(self, messages: list[Msg]) -> str:
        last = _validate(messages)
        digest = fnv1a_32(flatten_transcript(messages).encode("utf-8"))
        return f"echo:{last.text}:{digest:08x}"


@dataclass
class ProviderConfig:
    base_url: str
    api_key: str
    model_name: str
    timeout: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValidationError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")

    @staticmethod
    def from_env() -> "ProviderConfig":
        url = os.environ.get(ENV_URL)
        if not url:
            raise ConfigurationError(f"{ENV_URL} is not set")
        return ProviderConfig(
            base_url=url,
            api_key=os.environ.get(ENV_KEY, ""),
            model_name=os.environ.get(ENV_MODEL, ""),
        )


class HttpProvider:
    """Client for chat-completions-compatible endpoints.

    Retries transient failures (connect errors, 429, 5xx) with exponential
    backoff; a semaphore caps concurrent in-flight requests.
    """

    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout,
            transport=transport,
        )
        self._slots = threading.Semaphore(config.max_in_flight)

    def complete(self, messages: list[Msg]) -> str:
        _validate(messages)
        body = {
            "model": self.config.model_name,
            "messages": [
                {"role": _WIRE_ROLES[m.role], "content": m.text} for m in messages
            ],
        }
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last_detail = "no attempt made"
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(min(0.1 * 2 ** (attempt - 1), 5.0))
            with self._slots:
                try:
                    resp = self._client.post(
                        "/chat/completions", json=body, headers=headers
                    )
                except httpx.HTTPError as exc:
                    last_detail = f"transport: {exc}"
                    continue
            if resp.status_code == 200:
                try:
                    return resp.json()["choices"][0]["message"]["content"]
                except (KeyError, IndexError, ValueError) as exc:
                    raise TransportError(
                        "malformed provider response", detail=str(exc)
                    ) from exc
            last_detail = f"status {resp.status_code}: {resp.text[:200]}"
            if resp.status_code not in (429,) and resp.status_code < 500:
                break
        raise TransportError("provider request failed", detail=last_detail)

    def close(self) -> None:
        self._client.close()
