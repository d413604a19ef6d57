"""Prompting external chat models for pairwise event order.

The unified mode asks four ordering questions per event pair (start
earlier/later, end earlier/later), parses each answer into
{event_1, event_2, other}, and aggregates them into an interval
relation.  The classification mode asks for the relation label
directly, in two label orderings, optionally with majority vote over
several samples.

Transports are pluggable so tests never touch a network: a scripted
mock, an HTTP chat-completion client, and a caching wrapper that
stores responses in a content-addressed directory.
"""
from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MissingPlaceholder, TransportError
from .inference import (
    ANSWER_EVENT_1,
    ANSWER_EVENT_2,
    ANSWER_OTHER,
    llm_pair_relation,
    llm_point_relation,
)

PLACEHOLDERS = ("{TEXT}", "{EVENT_1}", "{EVENT_2}")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str
    answer_space: tuple = (ANSWER_EVENT_1, ANSWER_EVENT_2)


def mark_events(text: str, e1: str, e2: str) -> str:
    """Insert ### before the first event's trigger word and *** before
    the second's (first occurrence each)."""
    marked = text
    for word, marker in ((e1, "###"), (e2, "***")):
        i = marked.find(word)
        if i >= 0:
            marked = marked[:i] + marker + " " + marked[i:]
    return marked


def render(t: PromptTemplate, text: str, e1: str, e2: str) -> str:
    if not e1 or not e2:
        raise ValueError("event words must be non-empty")
    out = (
        t.text.replace("{TEXT}", mark_events(text, e1, e2))
        .replace("{EVENT_1}", e1)
        .replace("{EVENT_2}", e2)
    )
    leftover = re.search(r"\{[A-Z_0-9]+\}", out)
    if leftover:
        raise MissingPlaceholder(
            f"template {t.name!r} uses unknown placeholder {leftover.group(0)}"
        )
    return out


_QUESTION = (
    'Passage: "{TEXT}"\n'
    "In the passage, event_1 is the event triggered by \"{EVENT_1}\" "
    "(marked with ###) and event_2 is the event triggered by \"{EVENT_2}\" "
    "(marked with ***).\n"
    "Question: which event {WHAT}?\n"
    "Answer with exactly one of: event_1, event_2."
)

UNIFIED_TEMPLATES = (
    PromptTemplate("start_earlier", _QUESTION.replace("{WHAT}", "starts earlier")),
    PromptTemplate("start_later", _QUESTION.replace("{WHAT}", "starts later")),
    PromptTemplate("end_earlier", _QUESTION.replace("{WHAT}", "ends earlier")),
    PromptTemplate("end_later", _QUESTION.replace("{WHAT}", "ends later")),
)

_CLS_BODY = (
    'Passage: "{TEXT}"\n'
    "In the passage, event_1 is the event triggered by \"{EVENT_1}\" "
    "(marked with ###) and event_2 is the event triggered by \"{EVENT_2}\" "
    "(marked with ***).\n"
    "Question: what is the temporal relation of event_1 to event_2?\n"
    "Answer with exactly one of: {LABELS}."
)

def classification_template(labels, before_first: bool = True) -> PromptTemplate:
    """Label-choice prompt; the two variants differ only in where the
    schema's first label sits in the option list.  The answer space
    keeps schema order (vague last) regardless of the prompt order."""
    order = list(labels) if before_first else list(labels)[::-1]
    name = "classification_" + ("before_first" if before_first else "before_last")
    return PromptTemplate(name, _CLS_BODY.replace("{LABELS}", ", ".join(order)), tuple(labels))


def parse_answer(text: str, e1: str = None, e2: str = None) -> str:
    """Which event a free-form reply names; both or neither -> other."""
    low = text.lower()
    found1 = "event_1" in low or (e1 is not None and e1.lower() in low)
    found2 = "event_2" in low or (e2 is not None and e2.lower() in low)
    if found1 and not found2:
        return ANSWER_EVENT_1
    if found2 and not found1:
        return ANSWER_EVENT_2
    return ANSWER_OTHER


def parse_label_answer(text: str, labels) -> str:
    """Which relation label a reply names; ambiguity -> last label.

    The final label in a classification template's answer space is its
    vague option, which doubles as the fallback.
    """
    low = text.lower()
    hits = [l for l in labels if l.lower() in low]
    return hits[0] if len(hits) == 1 else labels[-1]


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportRequest:
    model: str
    messages: tuple  # of (role, content)
    temperature: float = 0.0
    max_tokens: int = 64

    def content_hash(self) -> str:
        blob = json.dumps(
            {
                "model": self.model,
                "messages": list(self.messages),
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TransportResponse:
    text: str
    finish: str = "stop"
    latency: float = 0.0


class MockTransport:
    """Replays a scripted list of answers in order.

    Script entries are strings; a dict {"error": msg} entry raises
    TransportError when reached, for failure-path tests.
    """

    def __init__(self, script):
        self.script = list(script)
        self.cursor = 0
        self.requests = []

    def send(self, request: TransportRequest) -> TransportResponse:
        self.requests.append(request)
        if self.cursor >= len(self.script):
            raise TransportError("mock script exhausted")
        entry = self.script[self.cursor]
        self.cursor += 1
        if isinstance(entry, dict):
            raise TransportError(entry.get("error", "scripted failure"))
        return TransportResponse(text=str(entry))


class HttpTransport:
    """Minimal chat-completion client with pacing and bounded retry."""

    def __init__(self, endpoint: str, api_key: str = "", model: str = "",
                 min_delay: float = 0.0, retries: int = 3, backoff: float = 1.0,
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.min_delay = min_delay
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self._last_sent = 0.0

    def send(self, request: TransportRequest) -> TransportResponse:
        import requests

        wait = self._last_sent + self.min_delay - time.monotonic()
        if wait > 0:
            time.sleep(wait)
        payload = {
            "model": request.model or self.model,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_exc = None
        for attempt in range(self.retries):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            start = time.monotonic()
            try:
                self._last_sent = time.monotonic()
                resp = requests.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
                resp.raise_for_status()
                body = resp.json()
                choice = body["choices"][0]
                return TransportResponse(
                    text=choice["message"]["content"],
                    finish=choice.get("finish_reason", "stop"),
                    latency=time.monotonic() - start,
                )
            except Exception as exc:  # noqa: BLE001 - retried, then wrapped
                last_exc = exc
        raise TransportError(f"endpoint failed after {self.retries} attempts: {last_exc}")


class CachingTransport:
    """Content-addressed response cache in front of another transport."""

    def __init__(self, inner, cache_dir):
        self.inner = inner
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def send(self, request: TransportRequest) -> TransportResponse:
        path = self.cache_dir / (request.content_hash() + ".json")
        if path.exists():
            obj = json.loads(path.read_text("utf-8"))
            return TransportResponse(**obj)
        resp = self.inner.send(request)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps({"text": resp.text, "finish": resp.finish, "latency": resp.latency}),
            "utf-8",
        )
        tmp.replace(path)
        return resp


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

@dataclass
class RunTrace:
    steps: list = field(default_factory=list)  # per prompt: dict
    start_relation: str = None
    end_relation: str = None
    relation: str = None

    def parsed_answers(self) -> list:
        return [s["parsed"] for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "start_relation": self.start_relation,
            "end_relation": self.end_relation,
            "relation": self.relation,
        }


def _ask(template, text, e1, e2, transport, model, temperature):
    prompt = render(template, text, e1, e2)
    request = TransportRequest(
        model=model, messages=(("user", prompt),), temperature=temperature
    )
    response = transport.send(request)
    return prompt, response


def run_unified(text: str, e1: str, e2: str, transport, model: str = "",
                temperature: float = 0.0, templates=UNIFIED_TEMPLATES):
    """Ask the four ordering questions and aggregate; returns
    (relation name, RunTrace).

    On a transport failure the raised TransportError carries the steps
    completed so far in its trace attribute.
    """
    trace = RunTrace()
    answers = []
    for template in templates:
        try:
            prompt, response = _ask(template, text, e1, e2, transport, model, temperature)
        except TransportError as exc:
            raise TransportError(str(exc), trace=trace.steps) from exc
        parsed = parse_answer(response.text, e1, e2)
        trace.steps.append(
            {
                "template": template.name,
                "prompt": prompt,
                "response": response.text,
                "parsed": parsed,
            }
        )
        answers.append(parsed)
    start_rel = llm_point_relation((answers[0], answers[1]))
    end_rel = llm_point_relation((answers[2], answers[3]))
    trace.start_relation = start_rel.value
    trace.end_relation = end_rel.value
    trace.relation = llm_pair_relation(start_rel, end_rel)
    return trace.relation, trace


def run_classification(text: str, e1: str, e2: str, transport, labels,
                       before_first: bool = True, k: int = 1, model: str = "",
                       temperature: float = 0.0):
    """Direct label prompting with optional k-sample majority vote.

    Vote ties (including every response unparseable) fall back to the
    last label, the schema's vague option.
    """
    template = classification_template(labels, before_first)
    votes = []
    steps = []
    for _ in range(k):
        try:
            prompt, response = _ask(template, text, e1, e2, transport, model, temperature)
        except TransportError as exc:
            raise TransportError(str(exc), trace=steps) from exc
        label = parse_label_answer(response.text, template.answer_space)
        steps.append(
            {
                "template": template.name,
                "prompt": prompt,
                "response": response.text,
                "parsed": label,
            }
        )
        votes.append(label)
    counts = {}
    for v in votes:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    winners = [v for v, c in counts.items() if c == top]
    relation = winners[0] if len(winners) == 1 else labels[-1]
    return relation, steps
