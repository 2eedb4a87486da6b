"""Document/candidate verification tasks: segmentation, per-statement checks, OR-merge.

The candidate text (a summary or a generated news article) is segmented into
statements; each statement is checked against the document in isolation; the
final label is positive exactly when at least one statement contradicts the
document. A backend may phrase the merge, but its answer must agree with that
existential rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..backends import Backend
from ..core import PromptTriple, SubTaskList, TaskAdapter, TaskInput
from ..errors import (
    DecomposeParseError,
    MergeInconsistency,
    PreconditionViolation,
    VerdictParseError,
)
from ..textseg import normalize_sentence, split_sentences

POSITIVE = "positive"   # contradiction / hallucination present
NEGATIVE = "negative"

SEGMENT_TEMPLATE = (
    "Please help me segment the following paragraph as sentences. The separated "
    "sentences should be output as: #Statement 1#: ...#Statement 2#: ..."
    "Do not say anything else. Just return the statements in the given format.\n"
    "Paragraph: {candidate}"
)
CHECK_TEMPLATE = (
    "I want you to act as a factual contradiction checker. You are given a set of "
    "statements and a document. Among the statements, there might be one or more "
    "statement that contains contradictions with the document. Please find the "
    "problematic statement if it exists by analyzing the statements one by one. "
    "For each statement, please make a choice:\n"
    "A: The statement is totally aligned with the document for sure.\n"
    "B: The statement contradicts with the document.\n"
    "Document: {document}\n"
    "#Statement {index}#: {statement}\n"
    "Answer with your choice for the statement."
)
MERGE_QUESTIONS = {
    "hallucination": (
        "Based on the above analysis, please tell me, does any statement above "
        "contain contradiction with the document? Please answer Yes or No."),
    "factcheck": (
        "If we connect the above statements to be a news article, based on the above "
        "analyzation, please answer me: Is there any contradiction between the "
        "document and the article? Please answer Yes or No."),
}
DIRECT_TEMPLATE = (
    "You are given a document and a {noun}. Document: {document}\n"
    "{title}: {candidate}\n"
    "Is there any contradiction between the document and the {noun}? "
    "Please answer Yes or No."
)
ARTICLE_TEMPLATE = (
    "Please extend the following claim as a short news article based on the "
    "evidence. Do not contradict the evidence. Claim: {claim}\nEvidence: {evidence}"
)

_STATEMENT_MARK = re.compile(r"#Statement (\d+)#:")
_LETTER = re.compile(r"\b([AB])\b")
_YES_NO = re.compile(r"\b(Yes|No)\b", re.IGNORECASE)
_FINAL_ANSWER = re.compile(r"Final answer:\s*(Yes|No)", re.IGNORECASE)

ALIGNED_PHRASE = "totally aligned with the document"
CONTRADICTS_PHRASE = "contradicts with the document"


@dataclass(frozen=True)
class VerificationInstance:
    id: str
    document: str
    candidate: str
    label: str  # positive = contradiction present, negative = consistent

    def __post_init__(self):
        if not self.document or not self.candidate:
            raise ValueError("document and candidate must be non-empty")
        if self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label must be positive/negative, got {self.label!r}")

    def to_task(self, task_kind: str = "hallucination") -> TaskInput:
        return TaskInput(
            {"id": self.id, "document": self.document, "candidate": self.candidate},
            task_kind)


@dataclass(frozen=True)
class Statement:
    index: int
    text: str


@dataclass(frozen=True)
class Verdict:
    statement_index: int
    choice: str  # A = aligned, B = contradicts
    rationale: str = ""

    def __post_init__(self):
        if self.choice not in ("A", "B"):
            raise ValueError(f"choice must be A or B, got {self.choice!r}")


def parse_statements(text: str) -> list[Statement]:
    """Parse '#Statement i#:' blocks; indices must run 1, 2, ... contiguously."""
    marks = list(_STATEMENT_MARK.finditer(text))
    if not marks:
        raise DecomposeParseError(f"no #Statement markers in: {text[:60]!r}")
    statements = []
    for pos, mark in enumerate(marks):
        end = marks[pos + 1].start() if pos + 1 < len(marks) else len(text)
        body = text[mark.end():end].strip()
        if not body:
            raise DecomposeParseError(f"statement {mark.group(1)} is empty")
        statements.append(Statement(int(mark.group(1)), body))
    if [s.index for s in statements] != list(range(1, len(statements) + 1)):
        raise DecomposeParseError(
            f"statement indices not contiguous from 1: {[s.index for s in statements]}")
    return statements


def parse_verdict(raw: str) -> str:
    """Return 'A' or 'B' from a checker response.

    A response selects an option through a standalone option letter or,
    failing that, through the option's phrase. Naming both options (or
    neither) is ambiguous.
    """
    if not raw:
        raise VerdictParseError("empty verdict response")
    letters = set(_LETTER.findall(raw))
    if len(letters) == 1:
        return letters.pop()
    if not letters:
        by_phrase = {choice for choice, phrase in
                     (("A", ALIGNED_PHRASE), ("B", CONTRADICTS_PHRASE)) if phrase in raw}
        if len(by_phrase) == 1:
            return by_phrase.pop()
        raise VerdictParseError(f"response names no option: {raw[:60]!r}")
    raise VerdictParseError(f"response names both options: {raw[:60]!r}")


def parse_yes_no(raw: str) -> bool:
    """True for a Yes answer; ambiguous or missing answers are errors."""
    answers = {m.lower() for m in _YES_NO.findall(raw)}
    if len(answers) != 1:
        raise VerdictParseError(f"expected exactly one Yes/No in: {raw[:60]!r}")
    return answers.pop() == "yes"


def existential_label(choices: Iterable[str]) -> str:
    return POSITIVE if any(c == "B" for c in choices) else NEGATIVE


def segment_candidate(candidate: str, backend: Backend) -> list[Statement]:
    """Ask the backend to segment the candidate into numbered statements."""
    if not candidate:
        raise PreconditionViolation("candidate must be non-empty")
    response = backend.complete_prompt(SEGMENT_TEMPLATE.format(candidate=candidate))
    return parse_statements(response.text)


def verify_statement(statement: Statement, document: str, backend: Backend) -> Verdict:
    """Check one statement against the document; the prompt carries only that
    statement."""
    if not statement.text or not document:
        raise PreconditionViolation("statement and document must be non-empty")
    prompt = CHECK_TEMPLATE.format(document=document, index=statement.index,
                                   statement=statement.text)
    response = backend.complete_prompt(prompt)
    return Verdict(statement.index, parse_verdict(response.text), response.text)


def merge_verdicts(verdicts: Sequence[Verdict], task_kind: str, backend: Backend,
                   separator: str = "[SEP]") -> str:
    """Let the backend phrase the merge, then hold it to the existential rule."""
    if not verdicts:
        raise PreconditionViolation("need at least one verdict to merge")
    merged = separator.join(v.choice for v in verdicts)
    prompt = f"Statement verdicts: {merged}\n{MERGE_QUESTIONS[task_kind]}"
    response = backend.complete_prompt(prompt)
    label = POSITIVE if parse_yes_no(response.text) else NEGATIVE
    expected = existential_label(v.choice for v in verdicts)
    if label != expected:
        raise MergeInconsistency(
            f"backend merged {merged!r} to {label}, existential rule says {expected}")
    return label


def generate_article(claim: str, evidence: str, backend: Backend) -> str:
    """Expand a claim into a short article grounded in the evidence."""
    if not claim or not evidence:
        raise PreconditionViolation("claim and evidence must be non-empty")
    prompt = ARTICLE_TEMPLATE.format(claim=claim, evidence=evidence)
    return backend.complete_prompt(prompt).text


def gold_labels_for_instances(instances: Iterable[VerificationInstance]) -> dict[str, str]:
    """Per-sentence gold labels for the exact mock: the first sentence of each
    positive candidate is marked as the contradicting one.

    Candidates sharing a first sentence must not carry conflicting labels.
    """
    gold: dict[str, str] = {}
    for inst in instances:
        if inst.label != POSITIVE:
            continue
        sentences = split_sentences(inst.candidate)
        if sentences:
            gold[normalize_sentence(sentences[0])] = "B"
    return gold


class _VerificationAdapter(TaskAdapter):
    """Shared adapter machinery for both verification task kinds."""

    noun: str  # "summary" or "article"
    placeholders = frozenset({"candidate", "document", "index", "statement", "merged"})

    def __init__(self):
        self.prompts.validate(self.placeholders)

    def render_decompose(self, task: TaskInput) -> str:
        return self.prompts.decompose.format(candidate=task.payload["candidate"])

    def parse_decomposition(self, task: TaskInput, text: str, provenance: str) -> SubTaskList:
        statements = parse_statements(text)
        document = task.payload["document"]
        items = tuple(
            TaskInput({"document": document, "index": s.index, "statement": s.text},
                      self.task_kind)
            for s in statements)
        return SubTaskList(items, provenance)

    def render_tackle(self, sub: TaskInput) -> str:
        return self.prompts.tackle.format(document=sub.payload["document"],
                                          index=sub.payload["index"],
                                          statement=sub.payload["statement"])

    def parse_tackle(self, sub: TaskInput, text: str) -> str:
        return parse_verdict(text)

    def render_merge(self, task: TaskInput, subtasks: SubTaskList, merged_context: str,
                     sub_answers: Sequence[str]) -> str:
        return self.prompts.merge.format(merged=merged_context)

    def parse_merge(self, task: TaskInput, text: str) -> str:
        return POSITIVE if parse_yes_no(text) else NEGATIVE

    def check_merge(self, task: TaskInput, sub_answers: Sequence[str], answer: str) -> None:
        expected = existential_label(sub_answers)
        if answer != expected:
            raise MergeInconsistency(
                f"merge produced {answer}, existential rule over {list(sub_answers)} "
                f"says {expected}")

    def problem_size(self, task: TaskInput) -> int:
        if "statement" in task.payload:
            return 1
        return max(1, len(split_sentences(task.payload["candidate"])))

    def render_direct(self, task: TaskInput, cot: bool) -> str:
        prompt = DIRECT_TEMPLATE.format(noun=self.noun, title=self.noun.capitalize(),
                                        document=task.payload["document"],
                                        candidate=task.payload["candidate"])
        if cot:
            prompt += "\nLet's check each statement step by step before answering."
        return prompt

    def parse_direct(self, task: TaskInput, text: str) -> str:
        return POSITIVE if parse_yes_no(text) else NEGATIVE

    def render_sequential_tackle(self, task: TaskInput, sub: TaskInput,
                                 prior: Sequence[tuple[TaskInput, str]], final: bool) -> str:
        parts = []
        if prior:
            lines = "\n".join(f"#Statement {p.payload['index']}# verdict: {ans}"
                              for p, ans in prior)
            parts.append(f"Verdicts of previously checked statements:\n{lines}\n")
        parts.append(self.render_tackle(sub))
        if final:
            parts.append(
                "Finally, based on all the verdicts above, does any statement "
                "contradict the document? Finish with 'Final answer: Yes' or "
                "'Final answer: No'.")
        return "\n".join(parts)

    def parse_sequential_final(self, task: TaskInput, text: str) -> str:
        m = _FINAL_ANSWER.search(text)
        if not m:
            raise VerdictParseError(f"no 'Final answer' in: {text[:60]!r}")
        return POSITIVE if m.group(1).lower() == "yes" else NEGATIVE


class HallucinationAdapter(_VerificationAdapter):
    task_kind = "hallucination"
    noun = "summary"
    prompts = PromptTriple(
        SEGMENT_TEMPLATE, CHECK_TEMPLATE,
        "Statement verdicts: {merged}\n" + MERGE_QUESTIONS["hallucination"])


class FactCheckAdapter(_VerificationAdapter):
    task_kind = "factcheck"
    noun = "article"
    prompts = PromptTriple(
        SEGMENT_TEMPLATE, CHECK_TEMPLATE,
        "Statement verdicts: {merged}\n" + MERGE_QUESTIONS["factcheck"])
