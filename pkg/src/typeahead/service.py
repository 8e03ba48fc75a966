"""Servable suggest pipeline: match -> rank hook -> de-boost -> truncate.

The third phase runs per request against immutable loaded state, so request
handling is freely concurrent. The second-phase hook is where a deployment
would plug session/seasonality reranking; the default keeps score order.

Wire contract (normative field names):
  GET /suggest?prefix=...&k=10&mode=control|dedup|mmr
    -> {"prefix": ..., "mode": ..., "suggestions":
        [{"rank": 1, "query": ..., "score": ..., "demoted": false}, ...]}
  GET /healthz -> {"status": "ok", "queries": N, "embeddings": M}
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Callable

from .completion import CompletionIndex
from .dedup import DedupConfig, demote, mmr_rerank
from .embeddings import EmbeddingTable
from .ingestion import build_embedding_table, load_embedding_file
from .ranking import RankedList

logger = logging.getLogger(__name__)

MODES = ("control", "dedup", "mmr")

LISTEN_ENV_VAR = "SUGGEST_LISTEN"
DEFAULT_LISTEN = "127.0.0.1:8080"

RankHook = Callable[[RankedList], RankedList]


@dataclass(frozen=True)
class ServiceConfig:
    index_path: str
    embeddings_path: str
    dedup: DedupConfig = field(default_factory=DedupConfig)
    visible_k: int = 10
    default_mode: str = "control"
    listen: str = DEFAULT_LISTEN
    strict_parse: bool = False

    def __post_init__(self) -> None:
        if self.visible_k < 1:
            raise ValueError("visible_k must be >= 1")
        if self.visible_k > self.dedup.pool_size:
            raise ValueError("visible_k must not exceed the candidate pool size")
        if self.default_mode not in MODES:
            raise ValueError(f"default_mode must be one of {MODES}")

    @classmethod
    def from_file(cls, path: str) -> "ServiceConfig":
        """Load the JSON config; SUGGEST_LISTEN in the env overrides `listen` only."""
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        dedup = DedupConfig(**data.get("dedup", {}))
        listen = os.environ.get(LISTEN_ENV_VAR, data.get("listen", DEFAULT_LISTEN))
        return cls(
            index_path=data["index"],
            embeddings_path=data["embeddings"],
            dedup=dedup,
            visible_k=data.get("visible_k", 10),
            default_mode=data.get("default_mode", "control"),
            listen=listen,
            strict_parse=data.get("strict_parse", False),
        )


@dataclass(frozen=True)
class SuggestResponse:
    prefix: str
    mode: str
    entries: RankedList

    def to_dict(self) -> dict:
        return {
            "prefix": self.prefix,
            "mode": self.mode,
            "suggestions": [
                {"rank": i + 1, "query": e.text, "score": e.score, "demoted": e.demoted}
                for i, e in enumerate(self.entries)
            ],
        }


class SuggestEngine:
    """The three-phase pipeline over an immutable index and embedding table."""

    def __init__(
        self,
        index: CompletionIndex,
        table: EmbeddingTable,
        dedup_cfg: DedupConfig | None = None,
        visible_k: int = 10,
        default_mode: str = "control",
        rank_hook: RankHook | None = None,
    ):
        self.index = index
        self.table = table
        self.dedup_cfg = dedup_cfg or DedupConfig()
        self.visible_k = visible_k
        self.default_mode = default_mode
        self.rank_hook = rank_hook

    @classmethod
    def from_config(cls, cfg: ServiceConfig, rank_hook: RankHook | None = None) -> "SuggestEngine":
        index = CompletionIndex.load(cfg.index_path)
        with open(cfg.embeddings_path, "r", encoding="utf-8") as fh:
            report = load_embedding_file(fh, strict=cfg.strict_parse)
        if report.errors:
            logger.warning("embedding file: %d undecodable lines skipped", len(report.errors))
        table = build_embedding_table(report.entries)
        logger.info("loaded %d queries, %d embeddings", len(index), len(table))
        return cls(
            index,
            table,
            dedup_cfg=cfg.dedup,
            visible_k=cfg.visible_k,
            default_mode=cfg.default_mode,
            rank_hook=rank_hook,
        )

    def suggest_list(self, prefix: str, k: int | None = None, mode: str | None = None) -> RankedList:
        """Ranked suggestions truncated to min(k, visible_k)."""
        mode = mode or self.default_mode
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        k = self.visible_k if k is None else min(k, self.visible_k)
        if k < 1:
            raise ValueError("k must be >= 1")
        pool = self.index.match(prefix, n=self.dedup_cfg.pool_size)
        if self.rank_hook is not None:
            pool = self.rank_hook(pool)
        if mode == "dedup":
            pool = demote(pool, self.table, self.dedup_cfg)
        elif mode == "mmr":
            pool = mmr_rerank(
                pool, self.table, self.dedup_cfg.mmr_lambda, min(k, len(pool))
            )
        return pool.top(k)

    def suggest(self, prefix: str, k: int | None = None, mode: str | None = None) -> SuggestResponse:
        return SuggestResponse(
            prefix=prefix,
            mode=mode or self.default_mode,
            entries=self.suggest_list(prefix, k, mode),
        )


def build_app(engine: SuggestEngine, ui_dir: str | None = None):
    """FastAPI app over an engine; mounts the demo UI at /ui when given a dir."""
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="typeahead-suggest")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET"], allow_headers=["*"]
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "queries": len(engine.index),
            "embeddings": len(engine.table),
        }

    @app.get("/suggest")
    def suggest(prefix: str, k: int | None = None, mode: str | None = None) -> dict:
        try:
            return engine.suggest(prefix, k, mode).to_dict()
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(cfg: ServiceConfig, ui_dir: str | None = None) -> None:
    """Run the HTTP service until interrupted."""
    import uvicorn

    engine = SuggestEngine.from_config(cfg)
    app = build_app(engine, ui_dir=ui_dir)
    host, _, port_text = cfg.listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValueError(f"listen address must be host:port, got {cfg.listen!r}")
    uvicorn.run(app, host=host, port=int(port_text), log_level="info")
