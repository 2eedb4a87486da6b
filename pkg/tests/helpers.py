"""Test doubles and trace inspection helpers shared across test modules."""

from dacsolver.backends import Backend, BackendRequest, BackendResponse
from dacsolver.errors import UnrecognizedPrompt


class CountingBackend(Backend):
    """Wraps a backend, keeping every request prompt in call order."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.prompts: list[str] = []

    @property
    def deterministic(self) -> bool:
        return self.inner.deterministic

    @property
    def model_id(self) -> str:
        return self.inner.model_id

    def make_request(self, prompt, system=None) -> BackendRequest:
        return self.inner.make_request(prompt, system)

    def complete(self, request: BackendRequest) -> BackendResponse:
        self.prompts.append(request.last_user_text())
        return self.inner.complete(request)

    @property
    def calls(self) -> int:
        return len(self.prompts)


class ScriptedBackend(Backend):
    """Answers prompts from (substring, response) rules, first match wins."""

    deterministic = True

    def __init__(self, rules: list[tuple[str, str]]):
        self.rules = rules

    def complete(self, request: BackendRequest) -> BackendResponse:
        prompt = request.last_user_text()
        for needle, response in self.rules:
            if needle in prompt:
                return BackendResponse(response, 0, "mock")
        raise UnrecognizedPrompt(f"no scripted rule for: {prompt[:60]!r}")


def intermediate_fragments(response: str, answer: str, min_len: int = 8) -> list[str]:
    """Pieces of a tackle response, beyond its parsed answer, long enough to
    identify intermediate text when they show up in a merge prompt."""
    pieces = response.split(answer) if answer else [response]
    return [p.strip() for p in pieces if len(p.strip()) >= min_len]


def leaked_intermediate(trace, parse_answer, min_len: int = 8) -> list[str]:
    """Fragments of tackle-stage responses found inside merge-stage prompts."""
    tackles = [r for r in trace if r.stage == "tackle"]
    merges = [r for r in trace if r.stage == "merge"]
    leaks = []
    for tackle in tackles:
        answer = parse_answer(tackle.response)
        for fragment in intermediate_fragments(tackle.response, answer, min_len):
            for merge in merges:
                if fragment in merge.prompt:
                    leaks.append(fragment)
    return leaks
