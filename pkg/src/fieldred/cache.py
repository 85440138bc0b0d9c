"""On-disk JSON cache for deterministic reports, keyed by command, parameters and package version."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path

log = logging.getLogger(__name__)


def cache_key(command: str, params: dict, version: str) -> str:
    blob = json.dumps({"command": command, "params": params, "version": version}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


class ReportCache:
    def __init__(self, directory: str | os.PathLike):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.json"

    def get(self, key: str):
        path = self._path(key)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            if entry.get("key") != key or "payload" not in entry:
                raise ValueError("key mismatch")
        except (ValueError, OSError) as exc:
            log.warning("discarding corrupt cache entry %s: %s", path.name, exc)
            path.unlink(missing_ok=True)
            return None
        return entry["payload"]

    def put(self, key: str, command: str, params: dict, version: str, payload) -> None:
        entry = {
            "key": key,
            "command": command,
            "params": params,
            "version": version,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "payload": payload,
        }
        tmp = self._path(key).with_suffix(".tmp")
        tmp.write_text(json.dumps(entry), encoding="utf-8")
        tmp.replace(self._path(key))
