"""Chat-completion clients: a deterministic mock, a fault injector for
tests, and an HTTP client for real endpoints."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol

import httpx

from ..errors import AgentCallFailed
from .blocks import AgentId

DEFAULT_MODEL_NAME = "gpt-4.1-2025-04-14"


@dataclass(frozen=True)
class ClientResponse:
    text: str
    model_name: str
    latency_ms: float
    token_counts: Mapping[str, int] | None = None


class ChatClient(Protocol):
    def complete(self, prompt: str, agent: AgentId) -> ClientResponse:
        """Return the model's response for a fully rendered prompt."""
        ...


class MockClient:
    """Offline client whose responses are a pure function of the prompt:
    it echoes the section headers it was given."""

    model_name = "mock"

    def complete(self, prompt: str, agent: AgentId) -> ClientResponse:
        headers = [
            line[4:] for line in prompt.splitlines() if line.startswith("### ")
        ]
        text = (
            f"[mock agent {agent.value}] response based on sections: "
            + "; ".join(headers)
        )
        return ClientResponse(
            text=text,
            model_name=self.model_name,
            latency_ms=0.0,
            token_counts={
                "prompt_tokens": len(prompt.split()),
                "completion_tokens": len(text.split()),
            },
        )


class FaultyClient:
    """Wraps another client and fails for the configured agents."""

    def __init__(self, inner: ChatClient, fail_on: Iterable[AgentId]):
        self.inner = inner
        self.fail_on = set(fail_on)

    def complete(self, prompt: str, agent: AgentId) -> ClientResponse:
        if agent in self.fail_on:
            raise AgentCallFailed(agent.value, "injected fault")
        return self.inner.complete(prompt, agent)


class HttpChatClient:
    """Chat-completion HTTP client.

    POSTs {base_url}/chat/completions with the rendered prompt as a single
    user message. The API key is read from an environment variable and never
    written to the request log; every exchange is appended to ``self.log``
    with the authorization header redacted.
    """

    def __init__(
        self,
        base_url: str,
        model_name: str = DEFAULT_MODEL_NAME,
        api_key_env: str = "CARECOST_LLM_API_KEY",
        timeout_s: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_name = model_name
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self._client = httpx.Client(timeout=timeout_s, transport=transport)
        self.log: list[dict] = []

    def complete(self, prompt: str, agent: AgentId) -> ClientResponse:
        body = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        headers = {}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        entry: dict = {
            "agent": agent.value,
            "request": {
                "url": f"{self.base_url}/chat/completions",
                "headers": {"authorization": "REDACTED"} if api_key else {},
                "body": body,
            },
        }
        started = time.perf_counter()
        try:
            response = self._client.post(
                f"{self.base_url}/chat/completions", json=body, headers=headers
            )
        except httpx.HTTPError as exc:
            entry["error"] = str(exc)
            self.log.append(entry)
            raise AgentCallFailed(agent.value, f"transport error: {exc}")
        latency_ms = (time.perf_counter() - started) * 1000.0
        entry["response"] = {
            "status": response.status_code,
            "body": _safe_json(response),
        }
        self.log.append(entry)
        if response.status_code != 200:
            raise AgentCallFailed(
                agent.value, f"endpoint returned status {response.status_code}"
            )
        data = _safe_json(response)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise AgentCallFailed(agent.value, "malformed completion payload")
        if not text:
            raise AgentCallFailed(agent.value, "empty completion text")
        usage = data.get("usage") if isinstance(data, dict) else None
        return ClientResponse(
            text=text,
            model_name=data.get("model", self.model_name),
            latency_ms=latency_ms,
            token_counts=usage,
        )


def _safe_json(response: httpx.Response):
    try:
        return response.json()
    except ValueError:
        return {"raw": response.text[:2000]}
