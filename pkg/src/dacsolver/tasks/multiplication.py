"""Long-integer multiplication task: splitting, pair products, shift/add merge.

A product a*b is decomposed by splitting each operand from the middle
(a = A concat B, b = C concat D) into four pair products resolved in
parallel, then merged as

    a*b = AC*10^(|B|+|D|) + AD*10^|B| + BC*10^|D| + BD

which generalizes the symmetric half-split formula to odd lengths.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from ..core import PromptTriple, SubTaskList, TaskAdapter, TaskInput
from ..errors import DecomposeParseError, NonDigitInput, TooShort

DECOMPOSE_TEMPLATE = (
    "Please split the string {a} from the middle as two separated strings. "
    "The lengths of the two separated strings should be as close as possible. "
    "Do the same for the string {b}. Please only return the four strings "
    "separated by commas and do not return anything else."
)
TACKLE_TEMPLATE = (
    "Please compute {x}*{y}. "
    "Please only return the final result and do not return anything else."
)
MERGE_TEMPLATE = (
    "Sub-task results: {merged}\n"
    "Please compute x={ac}*10^{eh}+{ad}*10^{em} and y={bc}*10^{el}+{bd}. "
    "Based on the above calculation, please compute x+y carefully step by step. "
    "Please only return the final result and do not return anything else."
)
IO_TEMPLATE = (
    "Please compute {a}*{b}. "
    "Please only return the final result and do not return anything else."
)
COT_TEMPLATE = (
    "Please compute {a}*{b}. "
    "Let's think step by step, and give only the final result on the last line."
)

_DIGIT_RUN = re.compile(r"\d+")
_SPLIT_REPLY = re.compile(r"(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)")


def validate_digits(s: str) -> str:
    if not s or not s.isdigit():
        raise NonDigitInput(f"expected a digit string, got {s!r}")
    return s


def canonical(s: str) -> str:
    """Strip leading zeros; the value zero stays '0'."""
    validate_digits(s)
    return s.lstrip("0") or "0"


class SplitPair(NamedTuple):
    high: str
    low: str
    low_len: int


def split_integer(s: str) -> SplitPair:
    """Middle split with the extra digit on the high side for odd lengths."""
    validate_digits(s)
    if len(s) < 2:
        raise TooShort(f"cannot split a {len(s)}-digit string")
    cut = (len(s) + 1) // 2
    return SplitPair(s[:cut], s[cut:], len(s) - cut)


def problem_size(a: str, b: str) -> int:
    """Size metric for the recursion threshold: the shorter operand's length."""
    validate_digits(a)
    validate_digits(b)
    return min(len(a), len(b))


def exact_multiply(a: str, b: str) -> str:
    """Exact arbitrary-precision product in canonical form."""
    return str(int(validate_digits(a)) * int(validate_digits(b)))


def merge_products(ac: str, ad: str, bc: str, bd: str, lb: int, ld: int) -> str:
    """Recombine the four pair products with the shifts implied by the two
    low-part lengths lb=|B| and ld=|D|."""
    value = (int(validate_digits(ac)) * 10 ** (lb + ld)
             + int(validate_digits(ad)) * 10 ** lb
             + int(validate_digits(bc)) * 10 ** ld
             + int(validate_digits(bd)))
    return str(value)


def _pair_subtasks(a: str, b: str, provenance: str,
                   a_split: SplitPair, b_split: SplitPair) -> SubTaskList:
    lb, ld = a_split.low_len, b_split.low_len
    pairs = (
        (a_split.high, b_split.high, lb + ld),
        (a_split.high, b_split.low, lb),
        (a_split.low, b_split.high, ld),
        (a_split.low, b_split.low, 0),
    )
    items = tuple(TaskInput({"a": x, "b": y, "shift": shift}, "multiplication")
                  for x, y, shift in pairs)
    return SubTaskList(items, provenance)


def build_subtasks(a: str, b: str) -> SubTaskList:
    """The four pair products (AC, AD, BC, BD), each annotated with its shift."""
    return _pair_subtasks(a, b, f"split:{a}x{b}", split_integer(a), split_integer(b))


def parse_final_digits(text: str) -> str:
    """The last maximal digit run in the text; model answers embed numbers in prose."""
    runs = _DIGIT_RUN.findall(text)
    if not runs:
        raise NonDigitInput(f"no digits in response: {text[:60]!r}")
    return runs[-1]


@dataclass(frozen=True)
class MultiplicationInstance:
    a: str
    b: str
    ground_truth: str

    def __post_init__(self):
        if exact_multiply(self.a, self.b) != canonical(self.ground_truth):
            raise ValueError(f"ground_truth is not the product of {self.a} and {self.b}")

    def to_task(self) -> TaskInput:
        return TaskInput({"a": self.a, "b": self.b}, "multiplication")


def gen_instances(count: int, digits: int, seed: int) -> list[MultiplicationInstance]:
    """Reproducible random operand pairs with a nonzero leading digit."""
    if count < 1 or digits < 1:
        raise ValueError("count and digits must be >= 1")
    rng = random.Random(seed)

    def operand() -> str:
        first = str(rng.randint(1, 9))
        rest = "".join(str(rng.randint(0, 9)) for _ in range(digits - 1))
        return first + rest

    out = []
    for _ in range(count):
        a, b = operand(), operand()
        out.append(MultiplicationInstance(a, b, exact_multiply(a, b)))
    return out


class MultiplicationAdapter(TaskAdapter):
    """Adapter wiring the pair-product scheme into the solvers."""

    task_kind = "multiplication"
    placeholders = frozenset(
        {"a", "b", "x", "y", "merged", "ac", "ad", "bc", "bd", "eh", "em", "el"})
    prompts = PromptTriple(DECOMPOSE_TEMPLATE, TACKLE_TEMPLATE, MERGE_TEMPLATE)

    def __init__(self):
        self.prompts.validate(self.placeholders)

    def _operands(self, task: TaskInput) -> tuple[str, str]:
        return task.payload["a"], task.payload["b"]

    def render_decompose(self, task: TaskInput) -> str:
        a, b = self._operands(task)
        if len(a) < 2 or len(b) < 2:
            raise TooShort(f"operands {a!r}, {b!r} cannot be split")
        return self.prompts.decompose.format(a=a, b=b)

    def parse_decomposition(self, task: TaskInput, text: str, provenance: str) -> SubTaskList:
        a, b = self._operands(task)
        m = _SPLIT_REPLY.search(text)
        if not m:
            raise DecomposeParseError(f"expected four comma-separated parts: {text[:60]!r}")
        a_high, a_low, b_high, b_low = m.groups()
        if a_high + a_low != a or b_high + b_low != b:
            raise DecomposeParseError(
                f"split {m.groups()} does not reassemble into {a!r} and {b!r}")
        return _pair_subtasks(a, b, provenance,
                              SplitPair(a_high, a_low, len(a_low)),
                              SplitPair(b_high, b_low, len(b_low)))

    def render_tackle(self, sub: TaskInput) -> str:
        return self.prompts.tackle.format(x=sub.payload["a"], y=sub.payload["b"])

    def parse_tackle(self, sub: TaskInput, text: str) -> str:
        return parse_final_digits(text)

    def render_merge(self, task: TaskInput, subtasks: SubTaskList, merged_context: str,
                     sub_answers: Sequence[str]) -> str:
        shifts = [item.payload["shift"] for item in subtasks]
        ac, ad, bc, bd = sub_answers
        return self.prompts.merge.format(merged=merged_context, ac=ac, ad=ad, bc=bc,
                                         bd=bd, eh=shifts[0], em=shifts[1], el=shifts[2])

    def parse_merge(self, task: TaskInput, text: str) -> str:
        return parse_final_digits(text)

    def problem_size(self, task: TaskInput) -> int:
        return problem_size(*self._operands(task))

    def render_direct(self, task: TaskInput, cot: bool) -> str:
        a, b = self._operands(task)
        template = COT_TEMPLATE if cot else IO_TEMPLATE
        return template.format(a=a, b=b)

    def parse_direct(self, task: TaskInput, text: str) -> str:
        return parse_final_digits(text)

    def render_sequential_tackle(self, task: TaskInput, sub: TaskInput,
                                 prior: Sequence[tuple[TaskInput, str]], final: bool) -> str:
        parts = []
        if prior:
            lines = "\n".join(f"{p.payload['a']}*{p.payload['b']}={ans}"
                              for p, ans in prior)
            parts.append(f"Results of previously solved sub-tasks:\n{lines}\n")
        parts.append(self.prompts.tackle.format(x=sub.payload["a"], y=sub.payload["b"]))
        if final:
            a, b = self._operands(task)
            parts.append(
                f"Finally, based on the sub-task results above, please compute the "
                f"original product {a}*{b}. Give only the final result on the last line.")
        return "\n".join(parts)

    def parse_sequential_final(self, task: TaskInput, text: str) -> str:
        return parse_final_digits(text)
