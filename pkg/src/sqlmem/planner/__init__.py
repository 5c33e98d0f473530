"""Planner implementations: deterministic rules and remote LLM."""

from .base import DirectReply, Plan, Planner, PlannerConfig, PlannerOutput
from .grammar import normalize_plan_text, parse_plan_text, render_plan_text
from .llm import Exemplar, LlmPlanner, estimate_tokens, load_exemplars
from .rule import RulePlanner, plan_question, plan_record


def make_planner(config: PlannerConfig):
    """Instantiate the planner the config asks for."""
    config.validate()
    if config.mode == "rule":
        return RulePlanner(config)
    return LlmPlanner(config)


__all__ = [
    "DirectReply",
    "Exemplar",
    "LlmPlanner",
    "Plan",
    "Planner",
    "PlannerConfig",
    "PlannerOutput",
    "RulePlanner",
    "estimate_tokens",
    "load_exemplars",
    "make_planner",
    "normalize_plan_text",
    "parse_plan_text",
    "plan_question",
    "plan_record",
    "render_plan_text",
]
