"""Content-addressed memo cache for computed map values.

Records live in memory and, when a path is configured, in one append-only
JSON-lines file: {"key", "kind", "payload", "engine", "version"} per line.
Point values store a rational string, function values the piecewise JSON
from funcspace.  Corrupt lines are discarded with a warning and recomputed.
Writes are serialized; readers see the in-memory dict.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from fractions import Fraction
from typing import Optional

from .funcspace import PiecewisePoly

log = logging.getLogger(__name__)

CACHE_VERSION = 1
ENV_PATH = "VANDERMOMENTS_CACHE_PATH"


class LambdaCache:
    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._mem: dict[tuple[str, str], dict] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if path and os.path.exists(path):
            self._load(path)

    def _load(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    if rec.get("version") != CACHE_VERSION:
                        continue
                    self._decode(rec)  # validate before keeping
                    self._mem[(rec["key"], rec["kind"])] = rec
                except Exception:
                    log.warning("discarding corrupt cache line %d in %s",
                                lineno, path)

    @staticmethod
    def _decode(rec: dict):
        if rec["kind"] == "pt":
            return Fraction(rec["payload"])
        return PiecewisePoly.from_json_dict(rec["payload"])

    def lookup(self, key: str, kind: str):
        rec = self._mem.get((key, kind))
        if rec is None:
            self.misses += 1
            return None
        try:
            value = self._decode(rec)
        except Exception:
            log.warning("discarding corrupt cache entry %r", key)
            with self._lock:
                self._mem.pop((key, kind), None)
            self.misses += 1
            return None
        self.hits += 1
        return value

    def store(self, key: str, kind: str, value, engine: str) -> None:
        payload = str(value) if kind == "pt" else value.to_json_dict()
        rec = {"key": key, "kind": kind, "payload": payload,
               "engine": engine, "version": CACHE_VERSION}
        with self._lock:
            if (key, kind) in self._mem:
                return  # idempotent: first write wins, values are deterministic
            self._mem[(key, kind)] = rec
            if self.path:
                os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec) + "\n")

    def stats(self) -> dict:
        kinds: dict[str, int] = {}
        for (_, kind) in self._mem:
            kinds[kind] = kinds.get(kind, 0) + 1
        return {"entries": len(self._mem), "by_kind": kinds,
                "hits": self.hits, "misses": self.misses,
                "path": self.path}

    def clear(self) -> None:
        with self._lock:
            self._mem.clear()
            if self.path and os.path.exists(self.path):
                os.remove(self.path)


_default = LambdaCache(os.environ.get(ENV_PATH) or None)


def default_cache() -> LambdaCache:
    return _default


def set_default_cache(cache: Optional[LambdaCache]) -> LambdaCache:
    global _default
    _default = cache if cache is not None else LambdaCache()
    return _default
