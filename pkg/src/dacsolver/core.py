"""Divide-and-conquer solvers and the prompting-strategy dispatcher.

Both solvers drive a task through three disentangled stages: one decompose
call splits the task into parallel sub-tasks, one tackle call resolves each
sub-task, and one merge call assembles the final answer from the sub-answers.
The multi-level solver recurses into any sub-task whose problem size still
exceeds the threshold `w`.
"""

from __future__ import annotations

import abc
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

from .backends import Backend
from .errors import EmptyInput, MaxDepthExceeded, UnsupportedStrategy

TASK_KINDS = ("multiplication", "hallucination", "factcheck", "bsi")
STRATEGIES = ("io", "cot", "ltm", "dac_single", "dac_multi")

DEFAULT_SEPARATOR = "[SEP]"


@dataclass(frozen=True)
class TaskInput:
    """A task instance: opaque payload plus the kind that selects its adapter."""

    payload: Any
    task_kind: str

    def __post_init__(self):
        if self.payload is None or self.payload == "" or self.payload == {}:
            raise ValueError("payload must be non-empty")
        if self.task_kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind: {self.task_kind!r}")


@dataclass(frozen=True)
class PromptTriple:
    """The three stage templates: decompose, tackle, merge."""

    decompose: str
    tackle: str
    merge: str

    def validate(self, allowed_placeholders: frozenset[str]) -> None:
        formatter = string.Formatter()
        for name, template in (("decompose", self.decompose), ("tackle", self.tackle),
                               ("merge", self.merge)):
            if not template:
                raise ValueError(f"{name} template is empty")
            for _, placeholder, _, _ in formatter.parse(template):
                if placeholder and placeholder not in allowed_placeholders:
                    raise ValueError(
                        f"{name} template uses undeclared placeholder {placeholder!r}")


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs: recursion threshold, separator, depth guard, concurrency."""

    w: int = 2
    separator: str = DEFAULT_SEPARATOR
    max_depth: int = 10
    parallelism: int = 1
    disentangled: bool = True
    strategy: str = "dac_multi"

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("w must be >= 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy: {self.strategy!r}")
        if not self.separator:
            raise ValueError("separator must be non-empty")


@dataclass(frozen=True)
class SubTaskList:
    """Ordered sub-tasks produced by one decompose call."""

    items: tuple[TaskInput, ...]
    provenance: str

    def __post_init__(self):
        if not self.items:
            raise ValueError("a decomposition must contain at least one sub-task")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class TraceRecord:
    stage: str  # decompose | tackle | merge
    prompt: str
    response: str
    depth: int


@dataclass
class Resolution:
    """Final answer plus the ordered transcript of every backend call."""

    answer: str
    trace: list[TraceRecord]
    depth_used: int


class TaskAdapter(abc.ABC):
    """Task-specific prompt rendering, response parsing and size metric.

    Adapters own the prompt triple and the formats it implies; the solvers in
    this module stay format-agnostic.
    """

    task_kind: str
    placeholders: frozenset[str]
    prompts: PromptTriple

    # -- divide-and-conquer stages --

    @abc.abstractmethod
    def render_decompose(self, task: TaskInput) -> str: ...

    @abc.abstractmethod
    def parse_decomposition(self, task: TaskInput, text: str, provenance: str) -> SubTaskList:
        """Raise DecomposeParseError when the text yields no valid sub-tasks."""

    @abc.abstractmethod
    def render_tackle(self, sub: TaskInput) -> str: ...

    @abc.abstractmethod
    def parse_tackle(self, sub: TaskInput, text: str) -> str:
        """Extract the sub-answer that may be forwarded downstream."""

    @abc.abstractmethod
    def render_merge(self, task: TaskInput, subtasks: SubTaskList, merged_context: str,
                     sub_answers: Sequence[str]) -> str: ...

    @abc.abstractmethod
    def parse_merge(self, task: TaskInput, text: str) -> str: ...

    @abc.abstractmethod
    def problem_size(self, task: TaskInput) -> int: ...

    def check_merge(self, task: TaskInput, sub_answers: Sequence[str], answer: str) -> None:
        """Optional consistency check of the merge answer against sub-answers."""

    # -- baseline strategies --

    @abc.abstractmethod
    def render_direct(self, task: TaskInput, cot: bool) -> str:
        """Single-call prompt; with cot=True it asks for step-by-step work."""

    @abc.abstractmethod
    def parse_direct(self, task: TaskInput, text: str) -> str: ...

    @abc.abstractmethod
    def render_sequential_tackle(self, task: TaskInput, sub: TaskInput,
                                 prior: Sequence[tuple[TaskInput, str]], final: bool) -> str:
        """Tackle prompt carrying all prior sub-answers; the last call also
        asks for the final answer to the original task."""

    @abc.abstractmethod
    def parse_sequential_final(self, task: TaskInput, text: str) -> str: ...


def assemble_subresults(answers: Sequence[str], separator: str) -> str:
    """Join sub-results with the separator token, in the given order."""
    if not answers:
        raise EmptyInput("no sub-results to assemble")
    return separator.join(answers)


@dataclass
class _SubResult:
    answer: str          # parsed final sub-answer
    raw: str             # full backend text for the ablation path
    records: list[TraceRecord]
    depth_used: int


def _resolve_one(sub: TaskInput, adapter: TaskAdapter, backend: Backend,
                 config: SolverConfig, depth: int, recursive: bool) -> _SubResult:
    if recursive and adapter.problem_size(sub) > config.w:
        if depth >= config.max_depth:
            raise MaxDepthExceeded(
                f"problem size {adapter.problem_size(sub)} still exceeds w={config.w} "
                f"at depth {depth}")
        child = _solve(sub, adapter, backend, config, depth + 1, recursive=True)
        return _SubResult(child.answer, child.trace[-1].response, child.trace,
                          child.depth_used)
    prompt = adapter.render_tackle(sub)
    response = backend.complete_prompt(prompt)
    answer = adapter.parse_tackle(sub, response.text)
    record = TraceRecord("tackle", prompt, response.text, depth)
    return _SubResult(answer, response.text, [record], depth)


def _solve(task: TaskInput, adapter: TaskAdapter, backend: Backend,
           config: SolverConfig, depth: int, recursive: bool) -> Resolution:
    d_prompt = adapter.render_decompose(task)
    d_response = backend.complete_prompt(d_prompt)
    provenance = backend.make_request(d_prompt).request_key[:16]
    subtasks = adapter.parse_decomposition(task, d_response.text, provenance)
    trace = [TraceRecord("decompose", d_prompt, d_response.text, depth)]

    # Sibling sub-tasks may resolve concurrently, but results are buffered and
    # assembled strictly in decomposition order.
    if config.parallelism > 1 and len(subtasks) > 1:
        with ThreadPoolExecutor(max_workers=min(config.parallelism, len(subtasks))) as pool:
            futures = [pool.submit(_resolve_one, sub, adapter, backend, config,
                                   depth, recursive)
                       for sub in subtasks]
            results = [f.result() for f in futures]
    else:
        results = [_resolve_one(sub, adapter, backend, config, depth, recursive)
                   for sub in subtasks]

    for result in results:
        trace.extend(result.records)

    sub_answers = [r.answer for r in results]
    forwarded = sub_answers if config.disentangled else [r.raw for r in results]
    merged_context = assemble_subresults(forwarded, config.separator)

    m_prompt = adapter.render_merge(task, subtasks, merged_context, sub_answers)
    m_response = backend.complete_prompt(m_prompt)
    answer = adapter.parse_merge(task, m_response.text)
    adapter.check_merge(task, sub_answers, answer)
    trace.append(TraceRecord("merge", m_prompt, m_response.text, depth))

    depth_used = max([depth] + [r.depth_used for r in results])
    return Resolution(answer, trace, depth_used)


def solve_single_level(task: TaskInput, adapter: TaskAdapter, backend: Backend,
                       config: SolverConfig) -> Resolution:
    """One decompose call, one tackle call per sub-task, one merge call."""
    return _solve(task, adapter, backend, config, depth=1, recursive=False)


def solve_multi_level(task: TaskInput, adapter: TaskAdapter, backend: Backend,
                      config: SolverConfig) -> Resolution:
    """Like the single-level solver, but any sub-task whose problem size
    exceeds config.w is solved by recursing rather than by one tackle call."""
    return _solve(task, adapter, backend, config, depth=1, recursive=True)


def _run_direct(task: TaskInput, adapter: TaskAdapter, backend: Backend,
                cot: bool) -> Resolution:
    prompt = adapter.render_direct(task, cot=cot)
    response = backend.complete_prompt(prompt)
    answer = adapter.parse_direct(task, response.text)
    return Resolution(answer, [TraceRecord("tackle", prompt, response.text, 1)], 1)


def _run_sequential(task: TaskInput, adapter: TaskAdapter, backend: Backend,
                    config: SolverConfig) -> Resolution:
    d_prompt = adapter.render_decompose(task)
    d_response = backend.complete_prompt(d_prompt)
    provenance = backend.make_request(d_prompt).request_key[:16]
    subtasks = adapter.parse_decomposition(task, d_response.text, provenance)
    trace = [TraceRecord("decompose", d_prompt, d_response.text, 1)]

    prior: list[tuple[TaskInput, str]] = []
    last_text = ""
    items = list(subtasks)
    for position, sub in enumerate(items):
        final = position == len(items) - 1
        prompt = adapter.render_sequential_tackle(task, sub, prior, final)
        response = backend.complete_prompt(prompt)
        trace.append(TraceRecord("tackle", prompt, response.text, 1))
        prior.append((sub, adapter.parse_tackle(sub, response.text)))
        last_text = response.text
    answer = adapter.parse_sequential_final(task, last_text)
    return Resolution(answer, trace, 1)


def run_strategy(strategy: str, task: TaskInput, adapter: TaskAdapter,
                 backend: Backend, config: SolverConfig) -> Resolution:
    """Dispatch to a baseline strategy or one of the divide-and-conquer solvers."""
    if strategy not in STRATEGIES:
        raise UnsupportedStrategy(f"unknown strategy: {strategy!r}")
    if adapter.task_kind != task.task_kind:
        raise UnsupportedStrategy(
            f"adapter for {adapter.task_kind!r} cannot run a {task.task_kind!r} task")
    if strategy == "io":
        return _run_direct(task, adapter, backend, cot=False)
    if strategy == "cot":
        return _run_direct(task, adapter, backend, cot=True)
    if strategy == "ltm":
        return _run_sequential(task, adapter, backend, config)
    if strategy == "dac_single":
        return solve_single_level(task, adapter, backend, config)
    return solve_multi_level(task, adapter, backend, config)
