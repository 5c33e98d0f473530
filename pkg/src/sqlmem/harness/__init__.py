"""Evaluation harness: CLI, grading, eval loops, sessions and HTTP service."""

from .evaluate import EvalReport, baseline_prompt, ingest_records, run_baseline, run_eval
from .grading import Verdict, extract_answer_field, grade
from .sessions import NotFound, SessionBusy, SessionManager

__all__ = [
    "EvalReport",
    "NotFound",
    "SessionBusy",
    "SessionManager",
    "Verdict",
    "baseline_prompt",
    "extract_answer_field",
    "grade",
    "ingest_records",
    "run_baseline",
    "run_eval",
]
