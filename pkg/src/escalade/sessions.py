"""Stepwise walkthrough sessions: one gate question at a time.

A session collects an incident record interactively, in gate order. Each
answer is merged into a draft record document, the answered gate is evaluated
immediately against the draft (live feedback), and the session short-circuits
exactly where the pipeline would: a failed or indeterminate causal gate, an
excluded domain, or an immediate trigger ends the interview early, and the
near-miss question is skipped when escalation is already decided.

On completion the draft becomes a full record and the stored trace is the
plain ``classify`` of that record with no cluster context, so exporting a
finished session and classifying the export reproduces the session's trace
byte for byte.

Persistence is an append-only JSONL journal of created/answered/forked events;
replaying the journal rebuilds identical state because every transition is a
pure function of the prior answers.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

from .config import EngineConfig
from .gates import ClassificationTrace, GateOutcome, GateResult, classify
from .model import (
    SCHEMA_VERSION,
    ConfigurationError,
    IncidentRecord,
    ModelError,
    ParseError,
    format_timestamp,
    parse_timestamp,
)
from .registry import default_harm_categories

# The C5 step covers both the category gate (C5a) and the severity gate (C5b).
QUESTION_ORDER = ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8")

_GATES_OF_STEP = {
    "C1": ("C1",),
    "C2": ("C2",),
    "C3": ("C3",),
    "C4": ("C4",),
    "C5": ("C5a", "C5b"),
    "C6": ("C6",),
    "C7": ("C7",),
    "C8": ("C8",),
}


class SessionError(ModelError):
    """An operation that the session's current state does not allow."""


class UnknownSessionError(KeyError):
    pass


QUESTIONS: dict[str, dict[str, Any]] = {
    "C1": {
        "prompt": "What role did the AI system play in causing the incident, and how confident is that assessment?",
        "fields": [
            {"name": "role", "type": "enum", "required": True,
             "choices": ["causal_factor", "detection_channel_only", "none", "unknown"]},
            {"name": "confidence", "type": "enum", "required": False,
             "choices": ["confirmed", "probable", "possible", "unknown"]},
            {"name": "evidence_available", "type": "bool", "required": False},
        ],
    },
    "C2": {
        "prompt": "In which domain did the incident occur?",
        "fields": [
            {"name": "scope_domain", "type": "enum", "required": True,
             "choices": ["civilian", "military", "national_security", "other"]},
        ],
    },
    "C3": {
        "prompt": "Were any immediate escalation conditions observed?",
        "fields": [
            {"name": "immediate_flags", "type": "enum_list", "required": False,
             "choices": ["cbrn_assistance", "weight_exfiltration",
                         "loss_of_developer_control", "deceptive_subversion_of_controls"]},
            {"name": "telemetry_available", "type": "bool", "required": False},
        ],
    },
    "C4": {
        "prompt": "What is the root-cause signature (for correlating related incidents)?",
        "fields": [
            {"name": "root_cause", "type": "object", "required": True,
             "shape": {"kind": ["technical", "capability", "contextual"], "key": "string"}},
            {"name": "cross_provider_available", "type": "bool", "required": False},
        ],
    },
    "C5": {
        "prompt": "What harm occurred, by category and severity (1 to 5)?",
        "fields": [
            {"name": "harm", "type": "harm_list", "required": False},
            {"name": "vulnerability_flags", "type": "enum_list", "required": False,
             "choices": ["minors", "mental_health_risk", "other_vulnerable"]},
            {"name": "harm_outcomes_available", "type": "bool", "required": False},
        ],
    },
    "C6": {
        "prompt": "Which jurisdictions are affected, and how does the harm propagate?",
        "fields": [
            {"name": "jurisdictions", "type": "string_list", "required": True},
            {"name": "propagation", "type": "object", "required": True,
             "shape": {"pathway": ["content_distribution", "model_weights", "api_access",
                                   "supply_chain", "human_mediated", "other"],
                       "velocity": ["hours", "days", "weeks", "months"],
                       "containment_feasible_nationally": ["yes", "no", "unknown"],
                       "standing_condition": "bool"}},
            {"name": "jurisdiction_data_available", "type": "bool", "required": False},
        ],
    },
    "C7": {
        "prompt": "Which layers of the damage are restorable?",
        "fields": [
            {"name": "reversibility", "type": "object", "required": True,
             "shape": {layer: ["restorable", "not_restorable", "unknown"]
                       for layer in ("containment", "control_restoration",
                                     "technical_state", "societal_state")}},
        ],
    },
    "C8": {
        "prompt": "Was this a near miss, and what harm was plausibly averted?",
        "fields": [
            {"name": "near_miss", "type": "bool", "required": True},
            {"name": "potential_harm", "type": "harm_list", "required": False},
        ],
    },
}

_RECORD_DEFAULTS: dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "causation": {"role": "unknown", "confidence": "unknown"},
    "scope_domain": "other",
    "immediate_flags": [],
    "harm": [],
    "potential_harm": None,
    "root_cause": {"kind": "technical", "key": "unspecified"},
    "jurisdictions": [],
    "propagation": {
        "pathway": "other",
        "velocity": "days",
        "containment_feasible_nationally": "unknown",
        "standing_condition": False,
    },
    "reversibility": {
        "containment": "unknown",
        "control_restoration": "unknown",
        "technical_state": "unknown",
        "societal_state": "unknown",
    },
    "near_miss": False,
    "vulnerability_flags": [],
    "affected_population": None,
    "event_count": None,
    "event_rate": None,
    "impact": None,
    "data_availability": {},
    "external_ids": [],
}


def _availability(doc: dict[str, Any], group: str, available: Any) -> None:
    if available is None:
        return
    if not isinstance(available, bool):
        raise ParseError(f"answer.{group}_available: expected boolean")
    doc.setdefault("data_availability", {})[group] = "available" if available else "unavailable"


_HARM_ENTRY_KEYS = ("category", "severity", "basis")


def _check_answer_fields(step: str, payload: Mapping[str, Any]) -> None:
    """Reject answer keys the question never asked.

    Record parsing tolerates partial documents, so a misspelled key would
    otherwise be dropped silently and come back as a data gap.
    """
    specs = {spec["name"]: spec for spec in QUESTIONS[step]["fields"]}
    for key in payload:
        if key not in specs:
            raise ParseError(f"answer.{key}: {step} takes no field named {key!r}")
    for name, spec in specs.items():
        value = payload.get(name)
        shape = spec.get("shape")
        if isinstance(shape, Mapping) and isinstance(value, Mapping):
            for key in value:
                if key not in shape:
                    raise ParseError(f"answer.{name}.{key}: expected keys from {sorted(shape)}")
        if spec["type"] != "harm_list" or not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
            continue
        for i, entry in enumerate(value):
            if not isinstance(entry, Mapping):
                continue  # the draft parse reports the type error with context
            for key in entry:
                if key not in _HARM_ENTRY_KEYS:
                    raise ParseError(
                        f"answer.{name}[{i}].{key}: expected keys from {list(_HARM_ENTRY_KEYS)}"
                    )


def _merge_answer(doc: dict[str, Any], step: str, payload: Mapping[str, Any]) -> None:
    """Fold one validated answer payload into the draft record document."""
    if step == "C1":
        doc["causation"] = {
            "role": payload.get("role"),
            "confidence": payload.get("confidence", "unknown"),
        }
        _availability(doc, "causation_evidence", payload.get("evidence_available"))
    elif step == "C2":
        doc["scope_domain"] = payload.get("scope_domain")
    elif step == "C3":
        doc["immediate_flags"] = list(payload.get("immediate_flags", []))
        _availability(doc, "telemetry", payload.get("telemetry_available"))
    elif step == "C4":
        doc["root_cause"] = payload.get("root_cause")
        _availability(doc, "cross_provider", payload.get("cross_provider_available"))
    elif step == "C5":
        doc["harm"] = list(payload.get("harm", []))
        doc["vulnerability_flags"] = list(payload.get("vulnerability_flags", []))
        _availability(doc, "harm_outcomes", payload.get("harm_outcomes_available"))
    elif step == "C6":
        doc["jurisdictions"] = list(payload.get("jurisdictions", []))
        doc["propagation"] = payload.get("propagation")
        _availability(doc, "jurisdiction_data", payload.get("jurisdiction_data_available"))
    elif step == "C7":
        doc["reversibility"] = payload.get("reversibility")
    elif step == "C8":
        doc["near_miss"] = payload.get("near_miss", False)
        raw = payload.get("potential_harm")
        doc["potential_harm"] = None if raw is None else list(raw)
    else:
        raise ConfigurationError(f"unknown question step {step!r}")


@dataclass
class Session:
    """Mutable walkthrough state; mutate only through :class:`SessionStore`."""

    id: str
    record_id: str
    title: str
    occurred_at: datetime
    reported_at: datetime
    created_at: datetime
    config: EngineConfig = field(default_factory=EngineConfig, repr=False)
    answers: dict[str, dict[str, Any]] = field(default_factory=dict)
    skipped: tuple[str, ...] = ()
    status: str = "in_progress"  # in_progress | complete
    trace: ClassificationTrace | None = None

    def current_step(self) -> str | None:
        if self.status == "complete":
            return None
        for step in QUESTION_ORDER:
            if step not in self.answers and step not in self.skipped:
                return step
        return None

    def _base_doc(self) -> dict[str, Any]:
        doc = json.loads(json.dumps(_RECORD_DEFAULTS))
        doc["id"] = self.record_id
        doc["title"] = self.title
        doc["occurred_at"] = format_timestamp(self.occurred_at)
        doc["reported_at"] = format_timestamp(self.reported_at)
        return doc

    def build_record(self) -> IncidentRecord:
        """Draft record from the answers so far; defaults fill the gaps."""
        doc = self._base_doc()
        for step in QUESTION_ORDER:
            if step in self.answers:
                _merge_answer(doc, step, self.answers[step])
        return IncidentRecord.from_dict(doc, f"session[{self.id}]")

    def _classify_draft(self) -> ClassificationTrace:
        return classify(self.build_record(), self.config)

    def apply_answer(self, step: str, payload: Mapping[str, Any]) -> list[GateOutcome]:
        """Validate and record one answer; returns the gate outcomes it produced."""
        current = self.current_step()
        if current is None:
            raise SessionError(f"session {self.id} is complete")
        if step != current:
            raise SessionError(f"session {self.id} expects an answer for {current}, got {step}")

        _check_answer_fields(step, payload)
        candidate = dict(payload)
        staged = dict(self.answers)
        staged[step] = candidate
        trial = Session(
            id=self.id,
            record_id=self.record_id,
            title=self.title,
            occurred_at=self.occurred_at,
            reported_at=self.reported_at,
            created_at=self.created_at,
            config=self.config,
            answers=staged,
        )
        if step == "C5":
            registry = default_harm_categories()
            raw_harm = candidate.get("harm", [])
            if isinstance(raw_harm, Sequence) and not isinstance(raw_harm, (str, bytes)):
                for i, entry in enumerate(raw_harm):
                    category = entry.get("category") if isinstance(entry, Mapping) else None
                    if category not in registry:
                        raise ParseError(
                            f"answer.harm[{i}].category: {category!r} is not registered"
                        )
        trace = trial._classify_draft()  # raises ParseError on a bad payload

        self.answers[step] = candidate
        outcomes = [o for o in trace.outcomes if o.gate in _GATES_OF_STEP[step]]
        self._advance(trace)
        return outcomes

    def _advance(self, draft_trace: ClassificationTrace) -> None:
        answered = self.answers
        done = False
        if "C1" in answered and draft_trace.result("C1") != GateResult.PASS:
            done = True
        elif "C2" in answered and draft_trace.result("C2") == GateResult.FAIL:
            done = True
        elif "C3" in answered and draft_trace.result("C3") == GateResult.TRIGGER:
            done = True
        if (
            not done
            and "C6" in answered
            and draft_trace.result("C5b") == GateResult.PASS
            and draft_trace.result("C6") == GateResult.PASS
            and "C8" not in self.skipped
        ):
            # Escalation is already decided; the near-miss question is moot.
            self.skipped = self.skipped + ("C8",)
        if self.current_step() is None:
            done = True
        if done:
            self.status = "complete"
            self.trace = self._classify_draft()

    def view(self) -> dict[str, Any]:
        current = self.current_step()
        state: dict[str, Any] = {
            "id": self.id,
            "record_id": self.record_id,
            "title": self.title,
            "occurred_at": format_timestamp(self.occurred_at),
            "reported_at": format_timestamp(self.reported_at),
            "created_at": format_timestamp(self.created_at),
            "status": self.status,
            "steps": list(QUESTION_ORDER),
            "answered": [s for s in QUESTION_ORDER if s in self.answers],
            "skipped": list(self.skipped),
            "current_gate": current,
            "question": (
                None if current is None else {"gate": current, **QUESTIONS[current]}
            ),
            "answers": {step: self.answers[step] for step in QUESTION_ORDER if step in self.answers},
        }
        live = self._classify_draft()
        answered_gates = {
            gate for step in self.answers for gate in _GATES_OF_STEP[step]
        }
        state["outcomes"] = [
            o.to_dict() for o in live.outcomes if o.gate in answered_gates or self.status == "complete"
        ]
        if self.status == "complete" and self.trace is not None:
            state["classification"] = self.trace.classification
            state["rationale"] = self.trace.rationale
            state["trace"] = self.trace.to_dict()
        else:
            state["classification"] = None
        return state


class SessionStore:
    """In-memory session registry with an optional append-only JSONL journal."""

    def __init__(self, journal_path: str | Path | None = None, config: EngineConfig | None = None):
        self._config = config or EngineConfig()
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._journal_path = Path(journal_path) if journal_path is not None else None
        if self._journal_path is not None and self._journal_path.exists():
            self._replay(self._journal_path.read_text(encoding="utf-8"))

    # -- journal ------------------------------------------------------------

    def _append(self, event: dict[str, Any]) -> None:
        if self._journal_path is None:
            return
        with self._journal_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, separators=(",", ":")) + "\n")

    def _replay(self, text: str) -> None:
        for line_number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"journal line {line_number}: invalid JSON: {exc}") from None
            kind = event.get("event")
            if kind == "created":
                self._create(
                    title=event["title"],
                    occurred_at=parse_timestamp(event["occurred_at"]),
                    reported_at=parse_timestamp(event["reported_at"]),
                    session_id=event["session_id"],
                    record_id=event["record_id"],
                    created_at=parse_timestamp(event["created_at"]),
                    journal=False,
                )
            elif kind == "answered":
                session = self._require(event["session_id"])
                session.apply_answer(event["gate"], event["payload"])
            elif kind == "forked":
                self._fork(
                    event["from"],
                    up_to=event.get("up_to"),
                    new_title=event.get("title"),
                    session_id=event["session_id"],
                    created_at=parse_timestamp(event["created_at"]),
                    journal=False,
                )
            else:
                raise ParseError(f"journal line {line_number}: unknown event {kind!r}")

    # -- operations ----------------------------------------------------------

    def _require(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(session_id)
        return session

    def _create(
        self,
        title: str,
        occurred_at: datetime,
        reported_at: datetime,
        session_id: str | None = None,
        record_id: str | None = None,
        created_at: datetime | None = None,
        journal: bool = True,
    ) -> Session:
        sid = session_id or uuid.uuid4().hex
        if sid in self._sessions:
            raise SessionError(f"session id {sid!r} already exists")
        session = Session(
            id=sid,
            record_id=record_id or f"session-{sid[:12]}",
            title=title,
            occurred_at=occurred_at,
            reported_at=reported_at,
            created_at=created_at or datetime.now(timezone.utc),
            config=self._config,
        )
        self._sessions[sid] = session
        if journal:
            self._append(
                {
                    "event": "created",
                    "session_id": session.id,
                    "record_id": session.record_id,
                    "title": session.title,
                    "occurred_at": format_timestamp(session.occurred_at),
                    "reported_at": format_timestamp(session.reported_at),
                    "created_at": format_timestamp(session.created_at),
                }
            )
        return session

    def create(
        self,
        title: str,
        occurred_at: datetime,
        reported_at: datetime,
        record_id: str | None = None,
    ) -> Session:
        with self._lock:
            return self._create(title, occurred_at, reported_at, record_id=record_id)

    def get(self, session_id: str) -> Session:
        with self._lock:
            return self._require(session_id)

    def list_sessions(self) -> list[Session]:
        with self._lock:
            return list(self._sessions.values())

    def answer(self, session_id: str, gate: str, payload: Mapping[str, Any]) -> Session:
        with self._lock:
            session = self._require(session_id)
            session.apply_answer(gate, payload)
            self._append(
                {
                    "event": "answered",
                    "session_id": session_id,
                    "gate": gate,
                    "payload": dict(payload),
                }
            )
            return session

    def _fork(
        self,
        source_id: str,
        up_to: str | None = None,
        new_title: str | None = None,
        session_id: str | None = None,
        created_at: datetime | None = None,
        journal: bool = True,
    ) -> Session:
        source = self._require(source_id)
        sid = session_id or uuid.uuid4().hex
        if sid in self._sessions:
            raise SessionError(f"session id {sid!r} already exists")
        if up_to is not None and up_to not in QUESTION_ORDER:
            raise SessionError(f"unknown gate {up_to!r}")
        fork = Session(
            id=sid,
            record_id=f"session-{sid[:12]}",
            title=new_title or source.title,
            occurred_at=source.occurred_at,
            reported_at=source.reported_at,
            created_at=created_at or datetime.now(timezone.utc),
            config=self._config,
        )
        self._sessions[sid] = fork
        keep = QUESTION_ORDER if up_to is None else QUESTION_ORDER[: QUESTION_ORDER.index(up_to)]
        for step in keep:
            if fork.status == "complete":
                break
            if step in source.answers and fork.current_step() == step:
                fork.apply_answer(step, dict(source.answers[step]))
        if journal:
            self._append(
                {
                    "event": "forked",
                    "session_id": fork.id,
                    "from": source_id,
                    "up_to": up_to,
                    "title": new_title,
                    "created_at": format_timestamp(fork.created_at),
                }
            )
        return fork

    def fork(self, source_id: str, up_to: str | None = None, new_title: str | None = None) -> Session:
        with self._lock:
            return self._fork(source_id, up_to=up_to, new_title=new_title)
