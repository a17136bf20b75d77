from .backends import BackendError, BrokenBackend, HttpChatBackend, MockBackend
from .prompts import PromptBundle, compose_user_message, feedback_block
from .schema import (Assumptions, GuidanceExecutables, SchemaValidationError,
                     ValidationIssue, validate_executables)
from .session import (GuidancePlanError, SessionState, apply_executables,
                      digest_run, llm_plan, load_transcript, save_transcript)

__all__ = [
    "BackendError", "BrokenBackend", "HttpChatBackend", "MockBackend",
    "PromptBundle", "compose_user_message", "feedback_block", "Assumptions",
    "GuidanceExecutables", "SchemaValidationError", "ValidationIssue",
    "validate_executables", "GuidancePlanError", "SessionState",
    "apply_executables", "digest_run", "llm_plan", "load_transcript",
    "save_transcript",
]
