from __future__ import annotations

import pytest

from spotdialog.config import EngineConfig
from spotdialog.llm_backend import (
    BackendError,
    BackendTimeout,
    CompletionResult,
    parse_fields,
)
from spotdialog.orchestrator import Engine
from spotdialog.stub_rules import build_stub_backend

TEMPLE_UTTERANCE = (
    "Yes, I want to visit a temple where I can see beautiful autumn leaves "
    "and have a panoramic view of Kyoto."
)
PARK_UTTERANCE = (
    "Yes, please also tell me about amusement parks in addition to temples."
)

TEMPLE_QUERY = {
    "major_categories": ["Sightseeing"],
    "subcategories": ["Sightseeing -- Shrines and Temples"],
    "minor_categories": ["Buildings and Historical Sites -- Historical Buildings"],
    "other": ["Kyoto"],
}
PARK_QUERY = {
    "major_categories": ["Recreation"],
    "subcategories": ["Recreation -- Theme Park"],
    "minor_categories": [],
    "other": [],
}


class FailingBackend:
    """Backend that always raises; exercises every caller's fallback."""

    def __init__(self, error: BackendError | None = None):
        self.error = error or BackendTimeout("simulated timeout")

    def complete(self, template, bindings):
        raise self.error


class CannedBackend:
    """Backend that replies with a fixed text regardless of the prompt."""

    def __init__(self, text: str):
        self.text = text

    def complete(self, template, bindings):
        return CompletionResult(
            text=self.text, fields=parse_fields(self.text), latency_ms=0, mode="live"
        )


@pytest.fixture(scope="session")
def stub_backend():
    return build_stub_backend()


@pytest.fixture(scope="session")
def config():
    return EngineConfig()


@pytest.fixture()
def engine(config):
    return Engine(config)
