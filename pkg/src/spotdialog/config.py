"""Engine configuration and packaged-data defaults."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .llm_backend import BackendConfig
from .spot_search import SearchWeights
from .voice_action import DEFAULT_BACKCHANNEL_TOKENS


def data_path(*parts: str) -> Path:
    return Path(str(resources.files("spotdialog").joinpath("data", *parts)))


def load_backchannel_tokens(path: Path | str | None = None) -> tuple[str, ...]:
    path = Path(path) if path is not None else data_path("backchannels.txt")
    tokens = tuple(
        line.strip()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    )
    return tokens or DEFAULT_BACKCHANNEL_TOKENS


@dataclass(frozen=True)
class EngineConfig:
    poi_path: Path = field(default_factory=lambda: data_path("spots.tsv"))
    templates_dir: Path = field(default_factory=lambda: data_path("templates"))
    prompts_dir: Path = field(default_factory=lambda: data_path("prompts"))
    llm: BackendConfig = field(default_factory=BackendConfig)
    top_k: int = 3
    search_limit: int = 5
    nod_window_ms: int = 1500
    silence_timeout_ms: int = 2500
    min_barge_in_tokens: int = 3
    new_token_nod_threshold: int = 8
    early_response: bool = False
    backchannel_tokens: tuple[str, ...] = field(
        default_factory=load_backchannel_tokens
    )
    weights: SearchWeights = field(default_factory=SearchWeights)

    def with_overrides(self, **kwargs) -> "EngineConfig":
        return replace(self, **kwargs)
