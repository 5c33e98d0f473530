"""Synthetic fruit-shop workload: records, oracle simulator, questions."""

from .generate import (
    Dataset,
    GenConfig,
    generate_dataset,
    load_dataset,
    save_dataset,
    save_transcript,
)
from .questions import (
    AnswerSpec,
    Categorical,
    DateAnswer,
    Numeric,
    Question,
    QuestionSpec,
    month_bounds,
    month_phrase,
    oracle_answer,
    parse_question_text,
    render_question,
)
from .records import (
    Customer,
    PriceChange,
    Purchase,
    PurchaseItem,
    Return,
    Sale,
    SaleItem,
    ShopRecord,
    Supplier,
    parse_record_text,
    render_record,
)
from .state import ShopState, apply_record, replay

__all__ = [
    "AnswerSpec",
    "Categorical",
    "Customer",
    "Dataset",
    "DateAnswer",
    "GenConfig",
    "Numeric",
    "PriceChange",
    "Purchase",
    "PurchaseItem",
    "Question",
    "QuestionSpec",
    "Return",
    "Sale",
    "SaleItem",
    "ShopRecord",
    "ShopState",
    "Supplier",
    "apply_record",
    "generate_dataset",
    "load_dataset",
    "month_bounds",
    "month_phrase",
    "oracle_answer",
    "parse_question_text",
    "parse_record_text",
    "render_question",
    "render_record",
    "replay",
    "save_dataset",
    "save_transcript",
]
