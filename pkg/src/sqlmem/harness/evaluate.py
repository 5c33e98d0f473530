"""Dataset evaluation: ingest records, answer questions, grade, report.

Two conditions share the grading path:

- ``run_eval``: the full loop — initialize the schema, process every record
  through the engine in order, then answer each question in its own turn
  (state is snapshotted after ingestion and rolled back after every
  question, so questions cannot contaminate each other).
- ``run_baseline``: the no-memory comparison — the entire record history is
  placed in one prompt per question and the endpoint answers directly.

Question failures of any kind count as wrong and never abort the run.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import httpx

from ..engine import UserInput, run_turn
from ..errors import RemoteError
from ..fruitshop.generate import Dataset
from ..fruitshop.questions import Question, answer_to_dict, month_phrase
from ..memory import MemoryHandle, init_schema
from ..planner.base import PlannerConfig
from ..planner.llm import complete_chat
from ..schema import fruit_shop_schema
from .grading import Verdict, grade

logger = logging.getLogger(__name__)


@dataclass
class QuestionVerdict:
    text: str
    difficulty: str
    expected: dict
    extracted: str
    correct: bool
    turn_id: int
    reason: str = ""


@dataclass
class EvalReport:
    model: str
    easy_correct: int = 0
    easy_total: int = 0
    hard_correct: int = 0
    hard_total: int = 0
    wall_seconds: float = 0.0
    verdicts: list[QuestionVerdict] = field(default_factory=list)

    @property
    def all_correct(self) -> int:
        return self.easy_correct + self.hard_correct

    @property
    def all_total(self) -> int:
        return self.easy_total + self.hard_total

    @property
    def accuracy(self) -> float:
        return self.all_correct / self.all_total if self.all_total else 0.0

    def add(self, question: Question, verdict: Verdict, turn_id: int) -> None:
        if question.difficulty == "easy":
            self.easy_total += 1
            self.easy_correct += int(verdict.correct)
        else:
            self.hard_total += 1
            self.hard_correct += int(verdict.correct)
        self.verdicts.append(
            QuestionVerdict(
                text=question.text,
                difficulty=question.difficulty,
                expected=answer_to_dict(question.answer),
                extracted=verdict.extracted,
                correct=verdict.correct,
                turn_id=turn_id,
                reason=verdict.reason,
            )
        )

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "easy": {"correct": self.easy_correct, "total": self.easy_total},
            "hard": {"correct": self.hard_correct, "total": self.hard_total},
            "all": {"correct": self.all_correct, "total": self.all_total},
            "accuracy": self.accuracy,
            "wall_seconds": self.wall_seconds,
            "questions": [
                {
                    "text": v.text,
                    "difficulty": v.difficulty,
                    "expected": v.expected,
                    "extracted": v.extracted,
                    "correct": v.correct,
                    "turn_id": v.turn_id,
                    "reason": v.reason,
                }
                for v in self.verdicts
            ],
        }

    def format_table(self) -> str:
        header = f"{'Model':<16}{'Easy':>8}{'Hard':>8}{'All':>8}{'Accuracy':>10}"
        row = (
            f"{self.model:<16}"
            f"{f'{self.easy_correct}/{self.easy_total}':>8}"
            f"{f'{self.hard_correct}/{self.hard_total}':>8}"
            f"{f'{self.all_correct}/{self.all_total}':>8}"
            f"{f'{round(self.accuracy * 100)}%':>10}"
        )
        return header + "\n" + row


def ingest_records(dataset: Dataset, planner, handle: MemoryHandle, trace_sink=None) -> int:
    """Run every record through the engine in order; returns next turn id."""
    turn_id = 1
    for _record, text in dataset.records:
        trace = run_turn(UserInput(text=text, turn_id=turn_id), planner, handle)
        if trace.error is not None:
            logger.warning("record turn %d failed: %s", turn_id, trace.error.message)
        if trace_sink is not None:
            trace_sink(trace)
        turn_id += 1
    return turn_id


def run_eval(dataset: Dataset, planner, model_name: str = "", trace_sink=None) -> EvalReport:
    """Evaluate a planner on a dataset; every question graded, none fatal."""
    started = time.perf_counter()
    report = EvalReport(model=model_name or planner.config.mode)
    handle = init_schema(fruit_shop_schema())
    try:
        turn_id = ingest_records(dataset, planner, handle, trace_sink)
        base = handle.snapshot("post-ingestion")
        for question in dataset.questions:
            trace = run_turn(UserInput(text=question.text, turn_id=turn_id), planner, handle)
            if trace_sink is not None:
                trace_sink(trace)
            verdict = grade(trace.reply, question.answer)
            report.add(question, verdict, turn_id)
            handle.rollback(base)
            turn_id += 1
    finally:
        handle.close()
    report.wall_seconds = time.perf_counter() - started
    return report


def baseline_prompt(records_text: str, question: str, month: str) -> str:
    """Single-prompt condition: the whole history inline, then the question."""
    phrase = month_phrase(month)
    month_name, year = phrase.split(" ")
    return (
        "Suppose you are a fruit shop manager and good at analyzing history records.\n"
        "\n"
        f"The fruit shop newly opened on {month_name} 1, {year}. Given the history "
        f"records for the fruit shop in {phrase}, which include customer names, "
        "transaction dates, fruit prices, quantities purchased, and whether the items "
        "were returned, you need to answer some questions.\n"
        "\n"
        "By default, exclude the sales transactions that have been returned when "
        "performing calculations.\n"
        "\n"
        "Here are the historical records of the fruit shop, which are arranged in "
        "chronological order based on the occurrence time, surrounded by triple "
        "backticks:\n"
        "\n"
        "```\n"
        f"{records_text}\n"
        "```\n"
        "\n"
        "Based on the history records, answer the question about the fruit shop:\n"
        "\n"
        f"{question}"
    )


def run_baseline(
    dataset: Dataset,
    config: PlannerConfig,
    transport: httpx.BaseTransport | None = None,
    model_name: str = "",
) -> EvalReport:
    """Grade the no-memory condition: one prompt per question, records inline."""
    started = time.perf_counter()
    report = EvalReport(model=model_name or (config.model or "baseline"))
    records_text = "\n".join(dataset.record_texts())
    client = httpx.Client(transport=transport, timeout=config.timeout)
    try:
        for turn_id, question in enumerate(dataset.questions, start=1):
            prompt = baseline_prompt(records_text, question.text, dataset.month)
            try:
                reply = complete_chat(client, config, [{"role": "user", "content": prompt}])
            except RemoteError as exc:
                report.add(question, Verdict(False, "", f"remote error: {exc}"), turn_id)
                continue
            report.add(question, grade(reply, question.answer), turn_id)
    finally:
        client.close()
    report.wall_seconds = time.perf_counter() - started
    return report


def save_report(report: EvalReport, path) -> None:
    from pathlib import Path

    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
