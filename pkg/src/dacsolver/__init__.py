"""Divide-and-conquer program-guided problem solving on language-model backends."""

from .backends import (
    BackendRequest,
    BackendResponse,
    ExactMockBackend,
    HttpChatBackend,
    RecordingBackend,
    ReplayBackend,
    TranscriptStore,
)
from .core import (
    PromptTriple,
    Resolution,
    SolverConfig,
    SubTaskList,
    TaskAdapter,
    TaskInput,
    TraceRecord,
    assemble_subresults,
    run_strategy,
    solve_multi_level,
    solve_single_level,
)
from .evaluation import (
    MetricReport,
    classification_report,
    exact_match_accuracy,
    levenshtein,
    load_dataset,
    run_experiment,
    write_report,
)
from .tasks import get_adapter

__version__ = "0.1.0"

__all__ = [
    "BackendRequest",
    "BackendResponse",
    "ExactMockBackend",
    "HttpChatBackend",
    "MetricReport",
    "PromptTriple",
    "RecordingBackend",
    "ReplayBackend",
    "Resolution",
    "SolverConfig",
    "SubTaskList",
    "TaskAdapter",
    "TaskInput",
    "TraceRecord",
    "TranscriptStore",
    "assemble_subresults",
    "classification_report",
    "exact_match_accuracy",
    "get_adapter",
    "levenshtein",
    "load_dataset",
    "run_experiment",
    "run_strategy",
    "solve_multi_level",
    "solve_single_level",
    "write_report",
    "__version__",
]
