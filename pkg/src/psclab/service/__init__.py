from .app import create_app, result_payload
from .store import SessionRecord, SessionStore

__all__ = ["create_app", "result_payload", "SessionRecord", "SessionStore"]
