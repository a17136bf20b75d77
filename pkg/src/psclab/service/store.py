"""On-disk session persistence: directory per session, append-only index.

Layout under the data root:

    index.jsonl                    one line per created session
    sessions/<sid>/state.json      session record (status, histories, runs)
    sessions/<sid>/runs/<rid>/     run artifacts (run log dir + guidance.json)

No database; every record is a plain JSON file rewritten atomically. The
service process serializes writers per session with an in-process lock.
"""

from __future__ import annotations

import json
import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

VALID_STATUS = ("idle", "planning", "running", "done", "error")


@dataclass
class SessionRecord:
    session_id: str
    created_at: float
    status: str = "idle"
    session: dict = field(default_factory=dict)   # guidance SessionState dict
    runs: list[dict] = field(default_factory=list)  # {run_id, status, instruction, error?}
    last_error: str | None = None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id, "created_at": self.created_at,
            "status": self.status, "session": self.session,
            "runs": self.runs, "last_error": self.last_error,
        }

    @staticmethod
    def from_dict(d: dict) -> "SessionRecord":
        return SessionRecord(**d)


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)

    def _state_path(self, sid: str) -> Path:
        return self.root / "sessions" / sid / "state.json"

    def run_dir(self, sid: str, rid: str) -> Path:
        return self.root / "sessions" / sid / "runs" / rid

    def create(self) -> SessionRecord:
        sid = uuid.uuid4().hex[:12]
        rec = SessionRecord(session_id=sid, created_at=time.time())
        (self.root / "sessions" / sid).mkdir(parents=True)
        self.save(rec)
        with open(self.root / "index.jsonl", "a") as f:
            f.write(json.dumps({"session_id": sid, "created_at": rec.created_at}) + "\n")
        return rec

    def save(self, rec: SessionRecord) -> None:
        path = self._state_path(rec.session_id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(rec.to_dict(), indent=2, sort_keys=True))
        os.replace(tmp, path)

    def load(self, sid: str) -> SessionRecord | None:
        path = self._state_path(sid)
        if not path.exists():
            return None
        return SessionRecord.from_dict(json.loads(path.read_text()))

    def list_ids(self) -> list[str]:
        idx = self.root / "index.jsonl"
        if not idx.exists():
            return []
        return [json.loads(line)["session_id"]
                for line in idx.read_text().strip().split("\n") if line]

    def sweep_interrupted(self) -> int:
        """Mark sessions left planning/running by a dead process as errored."""
        n = 0
        for sid in self.list_ids():
            rec = self.load(sid)
            if rec and rec.status in ("planning", "running"):
                rec.status = "error"
                rec.last_error = "interrupted by service restart"
                for run in rec.runs:
                    if run.get("status") in ("planning", "running"):
                        run["status"] = "error"
                        run["error"] = "interrupted by service restart"
                self.save(rec)
                n += 1
        return n
