"""Uniform completion interface with a deterministic offline stub.

Every module that needs language-model output goes through
:class:`LlmBackend.complete`.  Two implementations exist:

* :class:`StubBackend` — computes replies locally from the template name and
  the bound values via registered per-template rule functions.  No network,
  byte-stable output, used for all tests and replays.
* :class:`LiveBackend` — one HTTP round trip against a chat-completion
  endpoint, with bounded retries on transient failures.

Callers own their fallbacks: every failure surfaces as a typed, recoverable
:class:`BackendError` subclass, never as partial output.
"""

from __future__ import annotations

import os
import string
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Protocol

import requests


class BackendError(Exception):
    """Base class for recoverable completion failures."""


class BackendTimeout(BackendError):
    """The request exceeded the configured timeout."""


class BackendTransport(BackendError):
    """The endpoint was unreachable or returned an error status."""


class BackendMalformed(BackendError):
    """The reply could not be parsed into the expected shape."""


class MissingPlaceholderError(ValueError):
    """A template placeholder was left unbound."""


@dataclass(frozen=True)
class PromptTemplate:
    """Named template text with ``{placeholder}`` slots."""

    name: str
    text: str
    output_schema: str = "free text"

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(
            name
            for _, name, _, _ in string.Formatter().parse(self.text)
            if name
        )

    def render(self, bindings: Mapping[str, str]) -> str:
        missing = self.placeholders - set(bindings)
        if missing:
            raise MissingPlaceholderError(
                f"template {self.name!r} is missing binding(s): "
                + ", ".join(sorted(missing))
            )
        return self.text.format_map({k: str(v) for k, v in bindings.items()})

    @classmethod
    def load(cls, path: Path | str) -> "PromptTemplate":
        """Read a template file; leading ``#!`` lines carry metadata."""
        path = Path(path)
        schema = "free text"
        body_lines: list[str] = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.startswith("#!"):
                meta = line[2:].strip()
                if meta.lower().startswith("output:"):
                    schema = meta.split(":", 1)[1].strip()
                continue
            body_lines.append(line)
        return cls(name=path.stem, text="\n".join(body_lines).strip(), output_schema=schema)


def load_template_dir(directory: Path | str) -> dict[str, PromptTemplate]:
    directory = Path(directory)
    templates = {
        p.stem: PromptTemplate.load(p) for p in sorted(directory.glob("*.txt"))
    }
    if not templates:
        raise FileNotFoundError(f"no *.txt templates found in {directory}")
    return templates


@dataclass(frozen=True)
class BackendConfig:
    """Connection settings; ``mode`` selects stub or live behavior."""

    mode: str = "stub"
    endpoint: str = ""
    api_key_env: str = "LLM_API_KEY"
    model: str = ""
    timeout_ms: int = 10_000
    max_retries: int = 2
    model_overrides: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode not in ("stub", "live"):
            raise ValueError(f"unknown backend mode {self.mode!r}")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.mode == "live" and not self.endpoint:
            raise ValueError("live mode requires an endpoint")

    @classmethod
    def from_env(cls, mode: str = "stub") -> "BackendConfig":
        return cls(
            mode=mode,
            endpoint=os.environ.get("LLM_ENDPOINT", ""),
            api_key_env=os.environ.get("LLM_API_KEY_VAR", "LLM_API_KEY"),
            model=os.environ.get("LLM_MODEL", ""),
        )


@dataclass(frozen=True)
class CompletionResult:
    """Reply text plus any ``key: value`` lines parsed out of it."""

    text: str
    fields: tuple[tuple[str, str], ...]
    latency_ms: int
    mode: str

    def first(self, key: str) -> str | None:
        for k, v in self.fields:
            if k == key:
                return v
        return None

    def all(self, key: str) -> list[str]:
        return [v for k, v in self.fields if k == key]


def parse_fields(text: str) -> tuple[tuple[str, str], ...]:
    """Extract ``key: value`` lines, tolerating anything else in between."""
    fields: list[tuple[str, str]] = []
    for line in text.splitlines():
        if ":" not in line:
            continue
        key, value = line.split(":", 1)
        key = key.strip().lower()
        value = value.strip()
        if key and value:
            fields.append((key, value))
    return tuple(fields)


class LlmBackend(Protocol):
    """Anything that can answer a rendered prompt."""

    def complete(
        self, template: PromptTemplate, bindings: Mapping[str, object]
    ) -> CompletionResult:  # pragma: no cover - interface
        ...


StubRule = Callable[[Mapping[str, str]], str]


class StubBackend:
    """Deterministic offline backend.

    The reply is a pure function of ``(template.name, bindings)``: each
    template name dispatches to a registered rule over the canonicalized
    (stringified) bindings.  Unknown templates are an error rather than a
    silent empty reply.
    """

    def __init__(self, rules: Mapping[str, StubRule]):
        self._rules = dict(rules)

    def complete(
        self, template: PromptTemplate, bindings: Mapping[str, object]
    ) -> CompletionResult:
        missing = template.placeholders - set(bindings)
        if missing:
            raise MissingPlaceholderError(
                f"template {template.name!r} is missing binding(s): "
                + ", ".join(sorted(missing))
            )
        rule = self._rules.get(template.name)
        if rule is None:
            raise BackendMalformed(f"no stub rule for template {template.name!r}")
        canonical = {str(k): _canonical(v) for k, v in bindings.items()}
        text = rule(canonical)
        return CompletionResult(
            text=text, fields=parse_fields(text), latency_ms=0, mode="stub"
        )


def _canonical(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


class LiveBackend:
    """HTTP chat-completion client with bounded retry on transient errors."""

    def __init__(self, config: BackendConfig, session: requests.Session | None = None):
        if config.mode != "live":
            raise ValueError("LiveBackend requires mode='live'")
        self._config = config
        self._session = session or requests.Session()

    def complete(
        self, template: PromptTemplate, bindings: Mapping[str, object]
    ) -> CompletionResult:
        prompt = template.render({k: _canonical(v) for k, v in bindings.items()})
        model = self._config.model_overrides.get(template.name, self._config.model)
        payload = {
            "model": model,
            "messages": [{"role": "user", "content": prompt}],
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self._config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        started = time.monotonic()
        last_error: BackendError = BackendTransport("no attempt made")
        for _ in range(self._config.max_retries + 1):
            try:
                response = self._session.post(
                    self._config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self._config.timeout_ms / 1000.0,
                )
            except requests.Timeout:
                last_error = BackendTimeout(
                    f"no reply within {self._config.timeout_ms} ms"
                )
                continue
            except requests.RequestException as exc:
                last_error = BackendTransport(str(exc))
                continue
            if response.status_code >= 500:
                last_error = BackendTransport(f"server error {response.status_code}")
                continue
            if response.status_code >= 400:
                raise BackendTransport(f"request rejected: {response.status_code}")
            try:
                text = response.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendMalformed(f"unexpected reply shape: {exc}") from exc
            if not isinstance(text, str) or not text.strip():
                raise BackendMalformed("reply carried no text")
            latency = int((time.monotonic() - started) * 1000)
            return CompletionResult(
                text=text, fields=parse_fields(text), latency_ms=latency, mode="live"
            )
        raise last_error
