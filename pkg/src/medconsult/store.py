"""Durable session store: one canonical-JSON document per session on disk.

Documents wrap the CRM snapshot with the transcript and creation time. Writes
are atomic (temp file + rename) so a crash never leaves a torn snapshot; a
restarted server resumes every persisted session losslessly.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import StoreUnavailable, UnknownSession


class SessionStore:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            probe = self.directory / ".write-probe"
            probe.write_text("", encoding="utf-8")
            probe.unlink()
        except OSError as exc:
            raise StoreUnavailable(f"session store unusable at {self.directory}: {exc}") from exc

    def _path(self, session_id: str) -> Path:
        safe = "".join(c for c in session_id if c.isalnum() or c in "-_")
        if safe != session_id or not safe:
            raise UnknownSession(f"malformed session id: {session_id!r}")
        return self.directory / f"{safe}.json"

    def save(self, session_id: str, document: dict) -> None:
        path = self._path(session_id)
        tmp = path.with_suffix(".json.tmp")
        try:
            payload = json.dumps(
                document, sort_keys=True, ensure_ascii=False, separators=(",", ":")
            )
            tmp.write_text(payload, encoding="utf-8")
            os.replace(tmp, path)
        except OSError as exc:
            raise StoreUnavailable(f"cannot persist session {session_id}: {exc}") from exc

    def exists(self, session_id: str) -> bool:
        try:
            return self._path(session_id).exists()
        except UnknownSession:
            return False

    def load(self, session_id: str) -> dict:
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSession(f"unknown session: {session_id}")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreUnavailable(f"cannot read session {session_id}: {exc}") from exc

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))
