"""Content-addressed cache for chat LLM calls.

Keys are SHA-256 digests of the canonicalised request (sorted keys,
normalised numbers), so identical requests built from differently-ordered
config sources hit the same entry and any prompt-template change naturally
invalidates the cache.  Corrupt entries are treated as misses and evicted.
"""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path
from typing import Optional

from .backends import ChatRequest

log = logging.getLogger(__name__)


class ChatCache:
    def __init__(self, cache_dir):
        self.dir = Path(cache_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.json"

    def lookup(self, req: ChatRequest) -> Optional[str]:
        key = req.digest()
        path = self._path(key)
        if not path.exists():
            self.misses += 1
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            value = entry["value"]
            if not isinstance(value, str):
                raise ValueError("cached value is not a string")
        except (ValueError, KeyError, OSError) as err:
            log.warning("evicting corrupt cache entry %s: %s", key, err)
            path.unlink(missing_ok=True)
            self.misses += 1
            return None
        self.hits += 1
        return value

    def store(self, req: ChatRequest, value: str):
        key = req.digest()
        entry = {"key": key, "value": value, "created_at": time.time()}
        tmp = self._path(key).with_suffix(".tmp")
        tmp.write_text(json.dumps(entry, ensure_ascii=False), encoding="utf-8")
        tmp.replace(self._path(key))

    def wrap(self, chat_fn):
        """Return a chat callable that consults the cache first."""

        def cached_chat(req: ChatRequest) -> str:
            value = self.lookup(req)
            if value is None:
                value = chat_fn(req)
                self.store(req, value)
            return value

        return cached_chat
