"""Application configuration: embedder, backends, chunking, metrics, service.

Loaded from a single JSON file; every section falls back to defaults. The
default backend list names the four locally hosted models the service is
meant to compare, all reached over a local HTTP inference endpoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .docstore import ChunkingConfig
from .embedindex import EmbedderConfig
from .evalmetrics import ChrfConfig
from .ragchat import ModelBackendConfig, PromptTemplate

DEFAULT_TOKEN_ENV = "RAGBENCH_TOKEN"
DEFAULT_UPLOAD_CAP = 50 * 1024 * 1024

DEFAULT_MODEL_IDS = ("llama-2-13b", "medalpaca-13b", "meditron-7b",
                     "mistral-7b-instruct")


def default_backends(endpoint: str = "http://127.0.0.1:8080/generate"
                     ) -> list[ModelBackendConfig]:
    return [ModelBackendConfig(model_id=m, kind="http_generate", endpoint=endpoint)
            for m in DEFAULT_MODEL_IDS]


@dataclass
class AppConfig:
    port: int = 8000
    token_env: str = DEFAULT_TOKEN_ENV
    upload_cap_bytes: int = DEFAULT_UPLOAD_CAP
    default_k: int = 4
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    chrf: ChrfConfig = field(default_factory=ChrfConfig)
    prompt: PromptTemplate = field(default_factory=PromptTemplate)
    backends: list[ModelBackendConfig] = field(default_factory=default_backends)


def load_config(path: str | Path) -> AppConfig:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = AppConfig()
    cfg.port = data.get("port", cfg.port)
    cfg.token_env = data.get("token_env", cfg.token_env)
    cfg.upload_cap_bytes = data.get("upload_cap_bytes", cfg.upload_cap_bytes)
    cfg.default_k = data.get("default_k", cfg.default_k)
    if "embedder" in data:
        cfg.embedder = EmbedderConfig(**data["embedder"])
    if "chunking" in data:
        cfg.chunking = ChunkingConfig(**data["chunking"])
    if "chrf" in data:
        cfg.chrf = ChrfConfig(**data["chrf"])
    if "prompt" in data:
        cfg.prompt = PromptTemplate(**data["prompt"])
    if "backends" in data:
        cfg.backends = [ModelBackendConfig(**b) for b in data["backends"]]
    return cfg
