"""Content-addressed on-disk cache of search results."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from ..logging_utils import LogComponent, get_logger
from .models import SearchResult

logger = get_logger("cache", LogComponent.SCHOLAR)


def cache_key(query: str, limit: int) -> str:
    return hashlib.sha256(json.dumps([query, limit], ensure_ascii=False).encode("utf-8")).hexdigest()


class ScholarCache:
    """Layout: <root>/<first two hex chars>/<sha256>.json."""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def path_for(self, query: str, limit: int) -> Path:
        key = cache_key(query, limit)
        return self.root / key[:2] / f"{key}.json"

    def load(self, query: str, limit: int) -> Optional[SearchResult]:
        """The stored record exactly as written, or None."""
        path = self.path_for(query, limit)
        if not path.is_file():
            return None
        try:
            return SearchResult.model_validate_json(path.read_text(encoding="utf-8"))
        except (OSError, ValidationError) as exc:
            logger.warning(
                "Ignoring unreadable cache entry",
                operation="load",
                extra_fields={"path": str(path), "error": str(exc)},
            )
            return None

    def get(self, query: str, limit: int) -> Optional[SearchResult]:
        stored = self.load(query, limit)
        return stored.model_copy(update={"from_cache": True}) if stored is not None else None

    def put(self, result: SearchResult, limit: int) -> Path:
        path = self.path_for(result.query, limit)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = result.model_copy(update={"from_cache": False}).model_dump_json(indent=2) + "\n"
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        return path
