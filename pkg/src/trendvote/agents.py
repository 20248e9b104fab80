"""Provider-agnostic model client, research context gathering, panel instantiation.

Every model interaction goes through :class:`AgentClient.complete`, which
routes to a live HTTPS chat endpoint or to an offline mock table. Mock
responses are keyed by a stable hash of (endpoint_id, prompt), so any replay
against the same table is byte-identical; unscripted prompts fall back to an
optional deterministic responder, else to a sentinel string.

Panels of AI voters are generated by a chair endpoint that returns strict
JSON profiles; generation is re-prompted a bounded number of times until the
distinct-specialization and background-balance constraints hold.
"""

from __future__ import annotations

import json
import math
import os
import string
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Callable, Protocol

import requests

from .errors import (
    ContractViolation,
    PanelGenerationError,
    ProtocolError,
    TransportError,
)
from .util import stable_hash

PROVIDER_KINDS = ("live", "mock")
REGION_TAGS = ("US", "CN", "other")
RESEARCH_MODES = ("breakthrough_2025", "question_2026")
PROMPTS_VERSION = "v1"

MAX_ATTEMPTS = 3
BACKOFF_BASE_SECONDS = 0.5


@dataclass(frozen=True)
class AgentEndpoint:
    endpoint_id: str
    provider_kind: str
    model_name: str = ""
    base_url: str = ""
    credential_ref: str = ""
    temperature: float = 0.6
    region_tag: str = "other"

    def __post_init__(self):
        if self.provider_kind not in PROVIDER_KINDS:
            raise ContractViolation(f"unknown provider_kind {self.provider_kind!r}")
        if self.region_tag not in REGION_TAGS:
            raise ContractViolation(f"unknown region_tag {self.region_tag!r}")
        if self.temperature < 0:
            raise ContractViolation("temperature must be >= 0")


@dataclass(frozen=True)
class VoterProfile:
    voter_id: str
    kind: str  # human | ai
    level: str  # graduate | professor
    role: str
    specialization: str
    background: str

    def __post_init__(self):
        if self.kind not in ("human", "ai"):
            raise ContractViolation(f"unknown voter kind {self.kind!r}")
        if self.level not in ("graduate", "professor"):
            raise ContractViolation(f"unknown voter level {self.level!r}")

    def as_dict(self) -> dict:
        return {
            "voter_id": self.voter_id,
            "kind": self.kind,
            "level": self.level,
            "role": self.role,
            "specialization": self.specialization,
            "background": self.background,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "VoterProfile":
        return cls(**{k: obj[k] for k in (
            "voter_id", "kind", "level", "role", "specialization", "background"
        )})


@dataclass(frozen=True)
class PanelSpec:
    stage: str  # screening | refinement
    human_count: int
    ai_count: int
    level: str

    def __post_init__(self):
        if self.stage not in ("screening", "refinement"):
            raise ContractViolation(f"unknown stage {self.stage!r}")
        if self.human_count < 0 or self.ai_count < 0:
            raise ContractViolation("panel counts must be >= 0")

    @classmethod
    def defaults(cls, stage: str) -> "PanelSpec":
        if stage == "screening":
            return cls(stage="screening", human_count=30, ai_count=70, level="graduate")
        if stage == "refinement":
            return cls(stage="refinement", human_count=10, ai_count=30, level="professor")
        raise ContractViolation(f"unknown stage {stage!r}")


@dataclass(frozen=True)
class ContextDocument:
    doc_id: str
    mode: str
    endpoint_id: str
    created_at: str
    text: str
    template_hash: str = ""
    parents: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "mode": self.mode,
            "endpoint_id": self.endpoint_id,
            "created_at": self.created_at,
            "text": self.text,
            "template_hash": self.template_hash,
            "parents": list(self.parents),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ContextDocument":
        return cls(
            doc_id=obj["doc_id"],
            mode=obj["mode"],
            endpoint_id=obj["endpoint_id"],
            created_at=obj["created_at"],
            text=obj["text"],
            template_hash=obj.get("template_hash", ""),
            parents=tuple(obj.get("parents", ())),
        )


# -- prompt templates ----------------------------------------------------------


def load_template(name: str) -> tuple[string.Template, str]:
    """Load a versioned prompt template plus the hash of its raw text."""
    raw = (
        resources.files("trendvote")
        .joinpath(f"prompts/{PROMPTS_VERSION}/{name}.txt")
        .read_text(encoding="utf-8")
    )
    return string.Template(raw), stable_hash("template", PROMPTS_VERSION, raw)


# -- transports ----------------------------------------------------------------


class Transport(Protocol):
    def send(self, endpoint: AgentEndpoint, prompt: str) -> str: ...


class HttpChatTransport:
    """Minimal chat-completion POST. Credentials come from the environment.

    The key is read from the variable named by ``credential_ref`` or, when
    unset, from ``TRENDVOTE_KEY_<ENDPOINT_ID>``.
    """

    def __init__(self, timeout: float = 120.0):
        self.timeout = timeout
        self.calls = 0

    def send(self, endpoint: AgentEndpoint, prompt: str) -> str:
        self.calls += 1
        env_name = endpoint.credential_ref or "TRENDVOTE_KEY_" + "".join(
            ch if ch.isalnum() else "_" for ch in endpoint.endpoint_id.upper()
        )
        key = os.environ.get(env_name, "")
        try:
            resp = requests.post(
                endpoint.base_url.rstrip("/") + "/chat/completions",
                headers={"Authorization": f"Bearer {key}"},
                json={
                    "model": endpoint.model_name,
                    "temperature": endpoint.temperature,
                    "messages": [{"role": "user", "content": prompt}],
                },
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code >= 500 or resp.status_code == 429:
            raise TransportError(f"status {resp.status_code}")
        if resp.status_code != 200:
            raise ProtocolError(f"status {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"unexpected response envelope: {exc}") from exc


class MockTable:
    """Canned responses keyed by hash(endpoint_id, prompt), with a fallback.

    The on-disk form is a directory of ``<hash>.txt`` files. A responder hook
    may synthesize responses for unregistered prompts; without one a sentinel
    string is returned. The table is immutable once handed to a client.
    """

    def __init__(
        self,
        responses: dict[str, str] | None = None,
        responder: Callable[[str, str, dict | None], str | None] | None = None,
    ):
        self._responses = dict(responses or {})
        self.responder = responder

    @staticmethod
    def key(endpoint_id: str, prompt: str) -> str:
        return stable_hash(endpoint_id, prompt)

    def register(self, endpoint_id: str, prompt: str, text: str) -> None:
        self._responses[self.key(endpoint_id, prompt)] = text

    @classmethod
    def load_dir(cls, directory: Path | str, responder=None) -> "MockTable":
        responses = {}
        directory = Path(directory)
        if directory.is_dir():
            for path in sorted(directory.glob("*.txt")):
                responses[path.stem] = path.read_text(encoding="utf-8")
        return cls(responses, responder)

    def save_dir(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for key, text in sorted(self._responses.items()):
            (directory / f"{key}.txt").write_text(text, encoding="utf-8")

    def lookup(self, endpoint_id: str, prompt: str, hints: dict | None = None) -> str:
        key = self.key(endpoint_id, prompt)
        if key in self._responses:
            return self._responses[key]
        if self.responder is not None:
            text = self.responder(endpoint_id, prompt, hints)
            if text is not None:
                return text
        return f"[unscripted mock response {key[:12]}]"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class AgentClient:
    """Routes completions to mock or live transports, with bounded retries."""

    def __init__(
        self,
        mock_table: MockTable | None = None,
        live_transport: Transport | None = None,
        clock: Callable[[], str] = _utc_now,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.mock_table = mock_table or MockTable()
        self.live_transport = live_transport or HttpChatTransport()
        self.clock = clock
        self._sleep = sleep
        self.mock_calls = 0
        self.live_calls = 0

    def complete(
        self,
        endpoint: AgentEndpoint,
        prompt: str,
        decode_hints: dict | None = None,
    ) -> str:
        """One model call. Transport failures retry up to MAX_ATTEMPTS times."""
        if endpoint.provider_kind == "mock":
            self.mock_calls += 1
            return self.mock_table.lookup(endpoint.endpoint_id, prompt, decode_hints)
        self.live_calls += 1
        last: TransportError | None = None
        for attempt in range(MAX_ATTEMPTS):
            try:
                return self.live_transport.send(endpoint, prompt)
            except TransportError as exc:
                last = exc
                if attempt + 1 < MAX_ATTEMPTS:
                    self._sleep(BACKOFF_BASE_SECONDS * (2**attempt))
        raise TransportError(
            f"{endpoint.endpoint_id}: giving up after {MAX_ATTEMPTS} attempts: {last}"
        )


# -- research context ----------------------------------------------------------

_MODE_TEMPLATES = {
    "breakthrough_2025": "deep_research_breakthrough",
    "question_2026": "deep_research_question",
}


def run_deep_research(
    client: AgentClient, endpoint: AgentEndpoint, mode: str
) -> ContextDocument:
    """Issue the mode's research prompt verbatim and wrap the reply with provenance."""
    if mode not in RESEARCH_MODES:
        raise ContractViolation(f"unknown research mode {mode!r}")
    template, template_hash = load_template(_MODE_TEMPLATES[mode])
    prompt = template.template  # no substitutions: issued verbatim
    text = client.complete(
        endpoint, prompt, decode_hints={"kind": "deep_research", "mode": mode}
    )
    return ContextDocument(
        doc_id=stable_hash("context", mode, endpoint.endpoint_id, text)[:16],
        mode=mode,
        endpoint_id=endpoint.endpoint_id,
        created_at=client.clock(),
        text=text,
        template_hash=template_hash,
    )


def consolidate_contexts(
    client: AgentClient,
    doc_a: ContextDocument,
    doc_b: ContextDocument,
    endpoint: AgentEndpoint,
) -> ContextDocument:
    """Merge two research documents with a single completion call."""
    if not doc_a.text.strip() or not doc_b.text.strip():
        raise ContractViolation("cannot consolidate an empty context document")
    template, template_hash = load_template("consolidate")
    prompt = template.substitute(doc_a=doc_a.text, doc_b=doc_b.text)
    text = client.complete(
        endpoint, prompt, decode_hints={"kind": "consolidate", "mode": doc_a.mode}
    )
    return ContextDocument(
        doc_id=stable_hash("context", "consolidated", endpoint.endpoint_id, text)[:16],
        mode=doc_a.mode,
        endpoint_id=endpoint.endpoint_id,
        created_at=client.clock(),
        text=text,
        template_hash=template_hash,
        parents=(doc_a.doc_id, doc_b.doc_id),
    )


# -- panel instantiation ---------------------------------------------------------


def max_per_background(ai_count: int) -> int:
    return math.ceil(ai_count / 5)


def _panel_violations(profiles: list[dict], ai_count: int) -> list[str]:
    problems: list[str] = []
    if len(profiles) != ai_count:
        problems.append(f"expected {ai_count} profiles, got {len(profiles)}")
    for i, p in enumerate(profiles):
        for key in ("role", "specialization", "background"):
            if not isinstance(p.get(key), str) or not p[key].strip():
                problems.append(f"profile {i}: missing or empty {key}")
    specs = [p.get("specialization", "") for p in profiles]
    dupes = sorted({s for s in specs if specs.count(s) > 1 and s})
    for s in dupes:
        problems.append(f"duplicate specialization {s!r}")
    cap = max_per_background(ai_count)
    backgrounds = [p.get("background", "") for p in profiles]
    for b in sorted({b for b in backgrounds if b and backgrounds.count(b) > cap}):
        problems.append(f"background {b!r} held by more than {cap} members")
    return problems


def instantiate_panel(
    client: AgentClient, chair_endpoint: AgentEndpoint, spec: PanelSpec
) -> list[VoterProfile]:
    """Ask the chair endpoint for exactly ai_count voter personas.

    The response must be strict JSON; specializations must be pairwise
    distinct and no background may exceed ceil(ai_count / 5) members.
    Constraint failures are re-prompted up to MAX_ATTEMPTS times in total.
    """
    if spec.ai_count < 1:
        raise ContractViolation("panel generation needs ai_count >= 1")
    template, template_hash = load_template("chair_panel")
    violations: list[str] = []
    for attempt in range(1, MAX_ATTEMPTS + 1):
        note = (
            ""
            if attempt == 1
            else "Previous attempt was rejected: " + "; ".join(violations)
        )
        prompt = template.substitute(
            ai_count=spec.ai_count,
            level=spec.level,
            max_per_background=max_per_background(spec.ai_count),
            attempt=attempt,
            retry_note=note,
        )
        text = client.complete(
            chair_endpoint,
            prompt,
            decode_hints={
                "kind": "panel",
                "count": spec.ai_count,
                "level": spec.level,
                "attempt": attempt,
            },
        )
        try:
            payload = json.loads(text)
            profiles = payload["profiles"]
            if not isinstance(profiles, list):
                raise TypeError("profiles is not a list")
        except (ValueError, KeyError, TypeError) as exc:
            violations = [f"response is not valid profile JSON: {exc}"]
            continue
        violations = _panel_violations(profiles, spec.ai_count)
        if not violations:
            return [
                VoterProfile(
                    voter_id=f"ai-{spec.level}-{i + 1:03d}",
                    kind="ai",
                    level=spec.level,
                    role=p["role"].strip(),
                    specialization=p["specialization"].strip(),
                    background=p["background"].strip(),
                )
                for i, p in enumerate(profiles)
            ]
    raise PanelGenerationError(
        f"panel generation failed after {MAX_ATTEMPTS} attempts", violations
    )


@dataclass
class EndpointRoster:
    """The endpoints a pipeline run needs, grouped by role."""

    proposal: list[AgentEndpoint] = field(default_factory=list)
    research: list[AgentEndpoint] = field(default_factory=list)
    consolidator: AgentEndpoint | None = None
    chair: AgentEndpoint | None = None
    voter: AgentEndpoint | None = None

    def all_endpoints(self) -> list[AgentEndpoint]:
        out = list(self.proposal) + list(self.research)
        out += [e for e in (self.consolidator, self.chair, self.voter) if e]
        return out
