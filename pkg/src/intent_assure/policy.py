"""Policy tuples, policy trees and execution feedback.

Text form of a policy::

    M1 = (get, domain, zone=West, kpi=availability)
    E2 = (validate, [collector_1, collector_2], zone=West)
    E7 = (schedule, E6, frequency=hourly)

Values are untyped strings at parse time. A bare token shaped like a label
(``M2``, ``E6``) is a reference to an earlier policy in the same tree.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Union

from .errors import ParseError, TreeError

VERBS = (
    "get",
    "compliance",
    "avail",
    "create",
    "validate",
    "deploy",
    "configure",
    "start",
    "healthcheck",
    "schedule",
    "restart",
    "recreate",
)
POLICY_CLASSES = {"M": "measure", "A": "analyze", "E": "execute"}

LABEL_RE = re.compile(r"^[MAE][0-9]+$")
_TOKEN_CHARS = re.compile(r"[A-Za-z0-9_.%:/+@-]")


@dataclass(frozen=True)
class Ref:
    label: str

    def __str__(self):
        return self.label


Atom = Union[str, Ref]
Value = Union[Atom, tuple]


@dataclass(frozen=True)
class Policy:
    label: str
    verb: str
    subject: Value
    params: tuple[tuple[str, Value], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple((k, v) for k, v in self.params))
        if not LABEL_RE.match(self.label):
            raise ParseError(f"bad policy label {self.label!r}", self.label, 0)
        if self.verb not in VERBS:
            raise ParseError(f"unknown verb {self.verb!r}", self.verb, 0)

    @property
    def klass(self) -> str:
        return POLICY_CLASSES[self.label[0]]

    @property
    def index(self) -> int:
        return int(self.label[1:])

    @property
    def subjects(self) -> tuple:
        return self.subject if isinstance(self.subject, tuple) else (self.subject,)

    def param(self, key: str, default: Any = None) -> Any:
        for k, v in self.params:
            if k == key:
                return v
        return default

    def refs(self) -> list[str]:
        found = []
        for value in (self.subject, *(v for _, v in self.params)):
            items = value if isinstance(value, tuple) else (value,)
            found.extend(item.label for item in items if isinstance(item, Ref))
        return found

    def __str__(self):
        return serialize_policy(self)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "verb": self.verb,
            "subject": _value_to_json(self.subject),
            "params": {k: _value_to_json(v) for k, v in self.params},
        }

    @classmethod
    def from_json(cls, data: dict) -> Policy:
        return cls(
            data["label"],
            data["verb"],
            _value_from_json(data["subject"]),
            tuple((k, _value_from_json(v)) for k, v in data.get("params", {}).items()),
        )


def _value_to_json(value: Value):
    if isinstance(value, Ref):
        return {"ref": value.label}
    if isinstance(value, tuple):
        return [_value_to_json(v) for v in value]
    return value


def _value_from_json(data) -> Value:
    if isinstance(data, dict):
        return Ref(data["ref"])
    if isinstance(data, list):
        return tuple(_value_from_json(v) for v in data)
    return str(data)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str):
        raise ParseError(message, self.text, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            self.fail(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def token(self, what: str) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and _TOKEN_CHARS.match(self.text[self.pos]):
            self.pos += 1
        if self.pos == start:
            self.fail(f"expected {what}")
        return self.text[start : self.pos]

    def atom(self) -> Atom:
        tok = self.token("value")
        return Ref(tok) if LABEL_RE.match(tok) else tok

    def value(self) -> Value:
        if self.peek() != "[":
            return self.atom()
        self.expect("[")
        items = []
        if self.peek() == "]":
            self.pos += 1
            return ()
        while True:
            items.append(self.atom())
            if self.peek() == ",":
                self.pos += 1
                continue
            self.expect("]")
            return tuple(items)

    def policy(self) -> Policy:
        self.skip_ws()
        label_pos = self.pos
        label = self.token("policy label")
        self.expect("=")
        self.expect("(")
        self.skip_ws()
        verb_pos = self.pos
        verb = self.token("verb")
        if verb not in VERBS:
            self.pos = verb_pos
            self.fail(f"unknown verb {verb!r}")
        if not LABEL_RE.match(label):
            self.pos = label_pos
            self.fail(f"bad policy label {label!r}")
        self.expect(",")
        subject = self.value()
        params = []
        seen = set()
        while self.peek() == ",":
            self.pos += 1
            key_pos = self.pos
            key = self.token("parameter name")
            if key in seen:
                self.pos = key_pos
                self.fail(f"duplicate parameter {key!r}")
            seen.add(key)
            self.expect("=")
            params.append((key, self.value()))
        self.expect(")")
        self.skip_ws()
        if self.pos != len(self.text):
            self.fail("trailing text after policy")
        return Policy(label, verb, subject, tuple(params))


def parse_policy(text: str) -> Policy:
    return _Parser(text).policy()


def _format_value(value: Value) -> str:
    if isinstance(value, tuple):
        return "[" + ", ".join(str(v) for v in value) + "]"
    return str(value)


def serialize_policy(policy: Policy) -> str:
    parts = [policy.verb, _format_value(policy.subject)]
    parts.extend(f"{k}={_format_value(v)}" for k, v in policy.params)
    return f"{policy.label} = (" + ", ".join(parts) + ")"


@dataclass
class PolicyTree:
    """Ordered policies; execution order is list order."""

    phase: str = "fulfillment"
    policies: list[Policy] = field(default_factory=list)

    def __post_init__(self):
        if self.phase not in ("fulfillment", "assurance"):
            raise TreeError(f"unknown tree phase {self.phase!r}")
        existing, self.policies = list(self.policies), []
        for p in existing:
            self.append(p)

    def labels(self) -> list[str]:
        return [p.label for p in self.policies]

    def append(self, policy: Policy) -> None:
        labels = set(self.labels())
        if policy.label in labels:
            raise TreeError(f"duplicate label {policy.label}")
        forward = [r for r in policy.refs() if r not in labels]
        if forward:
            raise TreeError(f"{policy.label} references {forward} which are not earlier in the tree")
        self.policies.append(policy)

    def __iter__(self):
        return iter(self.policies)

    def __len__(self):
        return len(self.policies)

    def __getitem__(self, index):
        return self.policies[index]

    def get(self, label: str) -> Policy | None:
        for p in self.policies:
            if p.label == label:
                return p
        return None

    def verbs(self) -> list[str]:
        return [p.verb for p in self.policies]

    def to_text(self) -> str:
        return "\n".join(serialize_policy(p) for p in self.policies)

    @classmethod
    def from_text(cls, text: str, phase: str = "fulfillment") -> PolicyTree:
        lines = [ln.strip() for ln in text.splitlines()]
        return cls(phase, [parse_policy(ln) for ln in lines if ln and not ln.startswith("#")])

    def to_json(self) -> list[dict]:
        return [p.to_json() for p in self.policies]

    @classmethod
    def from_json(cls, data: Iterable[dict], phase: str = "fulfillment") -> PolicyTree:
        return cls(phase, [Policy.from_json(d) for d in data])


@dataclass(frozen=True)
class ExecutionFeedback:
    success: bool
    state: Any = field(default_factory=dict)

    def __str__(self):
        return render_feedback(self)

    def to_json(self) -> dict:
        return {"success": self.success, "state": self.state}

    @classmethod
    def from_json(cls, data: dict) -> ExecutionFeedback:
        return cls(bool(data["success"]), data.get("state", {}))


def _render(value: Any) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_render(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        sep = "," if value and all(isinstance(v, (dict, list, tuple)) for v in value) else ", "
        return "[" + sep.join(_render(v) for v in value) + "]"
    if value is None:
        return "None"
    if isinstance(value, float):
        return format(value, "g")
    return str(value)


def render_feedback(feedback: ExecutionFeedback) -> str:
    return f"{_render(feedback.success)}, {_render(feedback.state)}"


def feedback_json(feedback: ExecutionFeedback) -> str:
    return json.dumps(feedback.to_json(), sort_keys=False)


def as_int(value: Value) -> int:
    if isinstance(value, (tuple, Ref)):
        raise ValueError(f"expected a count, got {value!r}")
    return int(str(value))


def as_fraction(value: Value) -> float:
    """'99.99', '99.99%' and '0.9999' all mean 0.9999."""
    if isinstance(value, (tuple, Ref)):
        raise ValueError(f"expected a percentage, got {value!r}")
    text = str(value).strip()
    try:
        if text.endswith("%"):
            return float(Decimal(text[:-1]) / 100)
        number = Decimal(text)
    except InvalidOperation:
        raise ValueError(f"not a percentage: {value!r}") from None
    return float(number / 100 if number > 1 else number)


def as_list(value: Value) -> tuple:
    return value if isinstance(value, tuple) else (value,)
