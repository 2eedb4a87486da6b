"""Task adapters and the kind -> adapter registry."""

from __future__ import annotations

from ..core import TaskAdapter
from ..errors import UnsupportedStrategy
from .multiplication import MultiplicationAdapter
from .verification import FactCheckAdapter, HallucinationAdapter

_ADAPTERS = {
    "multiplication": MultiplicationAdapter,
    "hallucination": HallucinationAdapter,
    "factcheck": FactCheckAdapter,
}


def get_adapter(task_kind: str) -> TaskAdapter:
    try:
        return _ADAPTERS[task_kind]()
    except KeyError:
        raise UnsupportedStrategy(f"no adapter registered for task kind {task_kind!r}")
