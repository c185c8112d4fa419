"""Durable server state: in-memory for reads, append-only log for writes.

Every mutation is expressed as a StoredEvent. The live path appends the event
to the campaign's log (length-prefixed, checksummed, synchronously flushed)
and only then applies it to the in-memory state; startup replays the logs
through the same apply functions, so a crash at any record boundary restores
exactly the state the acknowledged events describe. Nothing is ever deleted:
re-done annotations and redistributions are new events, and superseded
records keep their history.

Log record framing: 4-byte big-endian body length, 4-byte big-endian CRC32 of
the body, then the body (canonical JSON, UTF-8). A torn trailing record is
discarded with a warning; corruption anywhere earlier refuses to load.
"""

from __future__ import annotations

import fcntl
import json
import logging
import os
import random
import secrets
import struct
import threading
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import DYNAMIC_BIAS_DISCLAIMER, build_ranking, progress_report
from .assignment import AssignmentEngine, CampaignComplete, ItemRef
from .campaign import (
    DEFAULT_SLIDER_ANCHORS,
    CampaignDefinition,
    UserIdentity,
    generate_links,
    parse_campaign,
)
from .errors import (
    AuthorizationError,
    CampaignValidationError,
    ConflictError,
    LogCorruptionError,
    NotFoundError,
    StateError,
    UnsupportedModeError,
)
from .quality import QualityLedger, completion_token, evaluate_rule
from .records import (
    ACTION_KINDS,
    SPAN_ORIGINS,
    ActionEvent,
    AnnotationRecord,
    SegmentAnnotation,
    span_from_dict,
)

logger = logging.getLogger(__name__)

EVENT_KINDS = (
    "campaign_added",
    "links_generated",
    "item_issued",
    "annotation_submitted",
    "rule_outcome",
    "tutorial_skip",
    "tasks_redistributed",
    "results_revealed",
)

EXPORT_FORMAT_VERSION = 1

_HEADER = struct.Struct(">II")  # body length, CRC32(body)


@dataclass(frozen=True)
class StoredEvent:
    sequence: int
    campaign_id: str
    timestamp_ms: int
    kind: str
    body: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.sequence,
            "campaign": self.campaign_id,
            "ts": self.timestamp_ms,
            "kind": self.kind,
            "body": self.body,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StoredEvent":
        return cls(d["seq"], d["campaign"], d["ts"], d["kind"], d["body"])


def encode_record(event: StoredEvent) -> bytes:
    body = json.dumps(event.to_dict(), ensure_ascii=False, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")
    return _HEADER.pack(len(body), zlib.crc32(body)) + body


def decode_records(data: bytes) -> tuple[list[StoredEvent], bool]:
    """Decode a log byte string into events.

    Returns (events, torn) where torn flags a discarded incomplete trailing
    record. Raises LogCorruptionError if a non-trailing record is damaged.
    """
    events: list[StoredEvent] = []
    offset = 0
    total = len(data)
    while offset < total:
        if total - offset < _HEADER.size:
            return events, True
        length, crc = _HEADER.unpack_from(data, offset)
        start = offset + _HEADER.size
        end = start + length
        if end > total:
            return events, True
        body = data[start:end]
        if zlib.crc32(body) != crc:
            if end == total:
                return events, True  # damaged final record: treat as torn
            raise LogCorruptionError(
                "checksum mismatch in non-trailing record",
                sequence=events[-1].sequence + 1 if events else 1,
            )
        event = StoredEvent.from_dict(json.loads(body.decode("utf-8")))
        expected = events[-1].sequence + 1 if events else 1
        if event.sequence != expected:
            raise LogCorruptionError(
                f"sequence gap: expected {expected}, found {event.sequence}",
                sequence=event.sequence,
            )
        events.append(event)
        offset = end
    return events, False


class EventLog:
    """Single-writer append-only log for one campaign."""

    def __init__(self, path: Path):
        self.path = path
        self._fh = open(path, "ab")
        try:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as exc:
            self._fh.close()
            raise StateError(f"campaign log {path} is locked by another process") from exc

    def append(self, event: StoredEvent) -> int:
        """Write and durably flush one record; returns the sequence."""
        record = encode_record(event)
        self._fh.write(record)
        self._fh.flush()
        os.fsync(self._fh.fileno())
        return event.sequence

    def close(self) -> None:
        self._fh.close()

    @staticmethod
    def read(path: Path) -> tuple[list[StoredEvent], bool]:
        with open(path, "rb") as fh:
            events, torn = decode_records(fh.read())
        if torn:
            logger.warning("discarded torn trailing record in %s", path)
        return events, torn


# ---------------------------------------------------------------------------
# Per-campaign in-memory state
# ---------------------------------------------------------------------------


@dataclass
class CampaignState:
    definition: CampaignDefinition
    file_dict: dict
    seed: str
    secret: str
    epoch_ms: int
    identities: dict[str, UserIdentity] = field(default_factory=dict)
    annotator_order: list[str] = field(default_factory=list)
    manager_id: str | None = None
    engine: AssignmentEngine | None = None
    ledger: QualityLedger = field(default_factory=QualityLedger)
    records: list[AnnotationRecord] = field(default_factory=list)
    live_record: dict[tuple[str, int, str], int] = field(default_factory=dict)
    issued_orders: dict[tuple[str, int], list[str]] = field(default_factory=dict)
    rule_outcomes: list[dict] = field(default_factory=list)
    submit_times_ms: dict[str, list[int]] = field(default_factory=dict)
    reveal_count: int = 0
    next_sequence: int = 1

    @property
    def info(self):
        return self.definition.info


class Store:
    """All campaigns of one server instance, event-sourced from per-campaign logs.

    Mutations run under a single writer lock; reads take the same lock briefly
    and never touch disk. Assignment randomness comes from one injected seed
    so test runs are reproducible.
    """

    def __init__(self, data_dir: str | Path, clock=time.time, rng_seed=None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock
        self.rng = random.Random(rng_seed)
        self.campaigns: dict[str, CampaignState] = {}
        self.tokens: dict[str, tuple[str, str, str]] = {}  # token -> (campaign, user, role)
        self._logs: dict[str, EventLog] = {}
        self._lock = threading.RLock()

    # -- lifecycle ------------------------------------------------------------

    def load(self) -> None:
        """Replay every campaign log in the data directory."""
        with self._lock:
            for path in sorted(self.data_dir.glob("*.log")):
                events, _torn = EventLog.read(path)
                for event in events:
                    self._apply(event)

    def close(self) -> None:
        with self._lock:
            for log in self._logs.values():
                log.close()
            self._logs.clear()

    def _log_for(self, campaign_id: str) -> EventLog:
        if campaign_id not in self._logs:
            self._logs[campaign_id] = EventLog(self.data_dir / f"{campaign_id}.log")
        return self._logs[campaign_id]

    def _now_ms(self) -> int:
        return int(self.clock() * 1000)

    def _emit(self, campaign_id: str, kind: str, body: dict, ts_ms: int | None = None) -> StoredEvent:
        """Append to the log, then apply to memory. A failed disk write
        propagates before any in-memory change: the log is the source of truth."""
        state = self.campaigns.get(campaign_id)
        seq = state.next_sequence if state else 1
        event = StoredEvent(seq, campaign_id,
                            ts_ms if ts_ms is not None else self._now_ms(), kind, body)
        self._log_for(campaign_id).append(event)
        self._apply(event)
        return event

    # -- event application (shared by live writes and replay) -----------------

    def _apply(self, event: StoredEvent) -> None:
        handler = self._APPLY.get(event.kind)
        if handler is None:
            raise LogCorruptionError(f"unknown event kind {event.kind!r}", event.sequence)
        handler(self, event)
        state = self.campaigns.get(event.campaign_id)
        if state is not None:
            state.next_sequence = max(state.next_sequence, event.sequence + 1)

    def _apply_campaign_added(self, event: StoredEvent) -> None:
        body = event.body
        definition = parse_campaign(json.dumps(body["file"]))
        self.campaigns[event.campaign_id] = CampaignState(
            definition=definition,
            file_dict=body["file"],
            seed=body["seed"],
            secret=body["secret"],
            epoch_ms=event.timestamp_ms,
            ledger=QualityLedger(threshold=definition.info.attention_threshold),
        )

    def _apply_links_generated(self, event: StoredEvent) -> None:
        state = self.campaigns[event.campaign_id]
        for entry in event.body["users"]:
            identity = UserIdentity(entry["user_id"], entry["token"], entry["role"])
            state.identities[identity.user_id] = identity
            self.tokens[identity.token] = (event.campaign_id, identity.user_id, identity.role)
            if identity.role == "annotator":
                state.annotator_order.append(identity.user_id)
            else:
                state.manager_id = identity.user_id
        state.engine = AssignmentEngine(state.definition, state.annotator_order, state.seed)

    def _apply_item_issued(self, event: StoredEvent) -> None:
        state = self.campaigns[event.campaign_id]
        body = event.body
        state.issued_orders[(body["user"], body["doc"])] = list(body["models"])
        # Idempotent: the live pooled path already marked this hold.
        assert state.engine is not None
        state.engine.mark_issued(body["user"], body["doc"], list(body["models"]),
                                 event.timestamp_ms / 1000.0)

    def _apply_annotation_submitted(self, event: StoredEvent) -> None:
        """One event per whole-document submission; bodies carry every model's record."""
        state = self.campaigns[event.campaign_id]
        assert state.engine is not None
        body = event.body
        redo = body.get("redo", False)
        scores_by_model: dict[str, list[float]] = {}
        user_id = None
        doc_index = None
        for raw in body["records"]:
            record = AnnotationRecord.from_dict(raw)
            record = AnnotationRecord(
                user_id=record.user_id,
                document_index=record.document_index,
                model_id=record.model_id,
                segments=record.segments,
                comment=record.comment,
                action_events=record.action_events,
                sequence=event.sequence,
                superseded_by=None,
            )
            user_id = record.user_id
            doc_index = record.document_index
            key = (record.user_id, record.document_index, record.model_id)
            if key in state.live_record and redo:
                prior_idx = state.live_record[key]
                prior = state.records[prior_idx]
                state.records[prior_idx] = AnnotationRecord(
                    user_id=prior.user_id,
                    document_index=prior.document_index,
                    model_id=prior.model_id,
                    segments=prior.segments,
                    comment=prior.comment,
                    action_events=prior.action_events,
                    sequence=prior.sequence,
                    superseded_by=event.sequence,
                )
            state.records.append(record)
            state.live_record[key] = len(state.records) - 1
            scores_by_model[record.model_id] = [seg.score for seg in record.segments]
        assert user_id is not None and doc_index is not None
        state.engine.record_completion(
            user_id, doc_index, scores_by_model, event.timestamp_ms / 1000.0, redo=redo
        )
        state.submit_times_ms.setdefault(user_id, []).append(event.timestamp_ms)

    def _apply_rule_outcome(self, event: StoredEvent) -> None:
        state = self.campaigns[event.campaign_id]
        body = event.body
        state.rule_outcomes.append(dict(body))
        if body["blocking"]:
            if not body["passed"]:
                state.ledger.record_tutorial_attempt(body["user"])
        else:
            state.ledger.record_check(body["user"], body["passed"])

    def _apply_tutorial_skip(self, event: StoredEvent) -> None:
        state = self.campaigns[event.campaign_id]
        state.rule_outcomes.append({**event.body, "skipped": True})
        state.ledger.record_tutorial_skip(event.body["user"])

    def _apply_tasks_redistributed(self, event: StoredEvent) -> None:
        state = self.campaigns[event.campaign_id]
        assert state.engine is not None
        body = event.body
        state.engine.redistribute(body["from"], body["to"], list(body["docs"]))

    def _apply_results_revealed(self, event: StoredEvent) -> None:
        self.campaigns[event.campaign_id].reveal_count += 1

    _APPLY = {
        "campaign_added": _apply_campaign_added,
        "links_generated": _apply_links_generated,
        "item_issued": _apply_item_issued,
        "annotation_submitted": _apply_annotation_submitted,
        "rule_outcome": _apply_rule_outcome,
        "tutorial_skip": _apply_tutorial_skip,
        "tasks_redistributed": _apply_tasks_redistributed,
        "results_revealed": _apply_results_revealed,
    }

    # -- campaign provisioning --------------------------------------------------

    def add_campaign(self, raw: bytes | str, base_url: str = "http://localhost:8000"):
        """Parse, validate, persist and provision a campaign. Returns the links."""
        definition = parse_campaign(raw)
        with self._lock:
            if definition.campaign_id in self.campaigns:
                raise ConflictError(f"campaign {definition.campaign_id!r} already exists")
            log_path = self.data_dir / f"{definition.campaign_id}.log"
            if log_path.exists() and log_path.stat().st_size > 0:
                raise ConflictError(f"campaign log {log_path} already exists")
            file_dict = json.loads(raw.decode("utf-8") if isinstance(raw, bytes) else raw)
            self._emit(definition.campaign_id, "campaign_added", {
                "file": file_dict,
                "seed": secrets.token_hex(8),
                "secret": secrets.token_hex(16),
            })
            annotators, manager = generate_links(definition, base_url)
            users = [
                {"user_id": ident.user_id, "token": ident.token, "role": ident.role}
                for ident, _url in annotators
            ]
            users.append({
                "user_id": manager[0].user_id,
                "token": manager[0].token,
                "role": manager[0].role,
            })
            self._emit(definition.campaign_id, "links_generated", {"users": users})
            return annotators, manager

    # -- annotator operations ----------------------------------------------------

    def _resolve(self, token: str, role: str | None = None) -> tuple[CampaignState, str, str]:
        entry = self.tokens.get(token)
        if entry is None:
            raise AuthorizationError("unknown token")
        campaign_id, user_id, user_role = entry
        if role is not None and user_role != role:
            raise AuthorizationError(f"{user_role} token cannot access this endpoint")
        return self.campaigns[campaign_id], campaign_id, user_id

    def session_info(self, token: str) -> dict:
        """Role and campaign basics so the static frontend can route itself."""
        with self._lock:
            state, campaign_id, user_id = self._resolve(token)
            return {
                "campaign_id": campaign_id,
                "user_id": user_id,
                "role": self.tokens[token][2],
                "protocol": state.info.protocol,
                "assignment": state.info.assignment,
            }

    def next_item(self, token: str) -> dict:
        """Assignment decision for an annotator; returns a wire-ready payload."""
        with self._lock:
            state, campaign_id, user_id = self._resolve(token, role="annotator")
            engine = state.engine
            assert engine is not None
            now_ms = self._now_ms()
            now_s = now_ms / 1000.0
            assignment = state.info.assignment
            if assignment == "task-based":
                result = engine.task_based_next(user_id)
            elif assignment == "single-stream":
                result = engine.single_stream_next(user_id, self.rng, now_s)
            else:
                result = engine.dynamic_next(user_id, self.rng, now_s)

            if isinstance(result, CampaignComplete):
                done = completion_token(state.ledger, campaign_id, user_id, state.secret)
                return {"complete": True, **done}

            key = (user_id, result.document_index)
            if state.issued_orders.get(key) != list(result.model_ids):
                self._emit(campaign_id, "item_issued", {
                    "user": user_id,
                    "doc": result.document_index,
                    "models": list(result.model_ids),
                }, ts_ms=now_ms)
            return self._item_payload(state, result)

    def _item_payload(self, state: CampaignState, item: ItemRef) -> dict:
        """Annotator-facing payload. True model ids never leave the server:
        outputs are keyed by positional aliases in display order."""
        doc = state.definition.documents[item.document_index]
        info = state.info
        aliases = [f"sys{i + 1}" for i in range(len(item.model_ids))]
        segments = []
        for seg in doc.segments:
            outputs = {}
            for alias, model in zip(aliases, item.model_ids):
                entry: dict = {"kind": seg.tgt[model].kind, "value": seg.tgt[model].value}
                prefilled = seg.prefilled_spans.get(model)
                if prefilled:
                    entry["prefilled_spans"] = [
                        {"start_i": s.start_i, "end_i": s.end_i,
                         "severity": s.severity, "origin": "prefilled"}
                        for s in prefilled
                    ]
                outputs[alias] = entry
            segments.append({
                "src": {"kind": seg.src.kind, "value": seg.src.value},
                "ref": {"kind": seg.ref.kind, "value": seg.ref.value} if seg.ref else None,
                "outputs": outputs,
            })
        if info.custom_sliders:
            sliders = [{"name": s.name, "anchors": list(s.anchors)} for s in info.custom_sliders]
        else:
            sliders = [{
                "name": "Quality",
                "anchors": [f"{pos}: {text}" for pos, text in DEFAULT_SLIDER_ANCHORS],
            }]
        return {
            "complete": False,
            "protocol": info.protocol,
            "document_index": item.document_index,
            "instructions": doc.instructions,
            "aliases": aliases,
            "segments": segments,
            "sliders": sliders,
            "progress": {"done": item.progress[0], "total": item.progress[1]},
            "flags": {
                "granularity_toggle": info.protocol in ("ESA", "MQM", "ESA^AI"),
                "alignment_hover": True,
                "postedit": info.allow_postedit,
                "redo": info.allow_redo,
                "contrastive": len(item.model_ids) > 1,
                "skip_allowed": any(
                    rule.blocking and rule.allow_skip
                    for seg in doc.segments
                    for model in item.model_ids
                    for rule in seg.validation.get(model, ())
                ),
            },
        }

    def submit(self, token: str, payload: dict) -> dict:
        """Whole-document submission: quality gates, then atomic persist."""
        with self._lock:
            state, campaign_id, user_id = self._resolve(token, role="annotator")
            engine = state.engine
            assert engine is not None
            now_ms = self._now_ms()

            doc_index = payload.get("document_index")
            if not isinstance(doc_index, int) or not 0 <= doc_index < len(state.definition.documents):
                raise CampaignValidationError("document_index", "missing or out of range")
            doc = state.definition.documents[doc_index]

            models = state.issued_orders.get((user_id, doc_index))
            if models is None:
                if state.info.assignment == "task-based":
                    models = list(engine.display_order(doc_index))
                else:
                    raise ConflictError("item was not issued to this annotator")
            aliases = [f"sys{i + 1}" for i in range(len(models))]
            alias_to_model = dict(zip(aliases, models))

            outputs = payload.get("outputs")
            if not isinstance(outputs, dict) or set(outputs) != set(aliases):
                raise CampaignValidationError("outputs", f"expected exactly the aliases {aliases}")
            skip_tutorial = bool(payload.get("skip_tutorial", False))
            comment = payload.get("comment")
            if comment is not None and not isinstance(comment, str):
                raise CampaignValidationError("comment", "must be a string")

            parsed = {
                alias: self._parse_output(state, doc, alias_to_model[alias], outputs[alias])
                for alias in aliases
            }
            scores_by_model = {
                alias_to_model[alias]: [seg.score for seg in segs]
                for alias, segs in parsed.items()
            }
            redo = state.info.allow_redo
            engine.check_completion(user_id, doc_index, list(scores_by_model), redo)

            blocked_warnings: list[str] = []
            outcome_events: list[dict] = []
            skip_events: list[dict] = []
            for alias in aliases:
                model = alias_to_model[alias]
                for seg_idx, seg in enumerate(doc.segments):
                    for rule_idx, rule in enumerate(seg.validation.get(model, ())):
                        if rule.blocking and rule.allow_skip and skip_tutorial:
                            skip_events.append({
                                "user": user_id, "doc": doc_index, "model": model,
                                "segment": seg_idx, "rule": rule_idx,
                            })
                            continue
                        comparators = {m: scores_by_model[m][seg_idx] for m in scores_by_model}
                        outcome = evaluate_rule(
                            rule,
                            parsed[alias][seg_idx].score,
                            list(parsed[alias][seg_idx].spans),
                            comparators,
                        )
                        outcome_events.append({
                            "user": user_id, "doc": doc_index, "model": model,
                            "segment": seg_idx, "rule": rule_idx,
                            "passed": outcome.passed, "blocking": outcome.blocking,
                            "failed": list(outcome.failed_conditions),
                        })
                        if outcome.blocking and not outcome.passed:
                            blocked_warnings.append(outcome.warning or "")

            if blocked_warnings:
                # Tutorial unmet: log the failed attempts, persist no record.
                for body in outcome_events:
                    if body["blocking"] and not body["passed"]:
                        self._emit(campaign_id, "rule_outcome", body, ts_ms=now_ms)
                return {"status": "blocked", "warnings": blocked_warnings}

            for body in skip_events:
                self._emit(campaign_id, "tutorial_skip", body, ts_ms=now_ms)
            for body in outcome_events:
                self._emit(campaign_id, "rule_outcome", body, ts_ms=now_ms)

            action_events = self._parse_action_events(
                payload.get("events", []), user_id, doc_index, alias_to_model
            )
            record_dicts = []
            for i, alias in enumerate(aliases):
                model = alias_to_model[alias]
                events = tuple(
                    e for e in action_events
                    if e.model_id == model or (e.model_id is None and i == 0)
                )
                record_dicts.append(AnnotationRecord(
                    user_id=user_id,
                    document_index=doc_index,
                    model_id=model,
                    segments=parsed[alias],
                    comment=comment,
                    action_events=events,
                ).to_dict())
            self._emit(campaign_id, "annotation_submitted",
                       {"records": record_dicts, "redo": redo}, ts_ms=now_ms)

            done, total = engine.user_progress(user_id)
            return {"status": "accepted", "progress": {"done": done, "total": total}}

    def _parse_output(self, state: CampaignState, doc, model: str, raw) -> tuple[SegmentAnnotation, ...]:
        info = state.info
        if not isinstance(raw, dict) or not isinstance(raw.get("segments"), list):
            raise CampaignValidationError("outputs", "each output needs a 'segments' list")
        raw_segments = raw["segments"]
        if len(raw_segments) != len(doc.segments):
            raise CampaignValidationError(
                "outputs.segments",
                f"expected {len(doc.segments)} segments, got {len(raw_segments)}",
            )
        parsed = []
        for seg_idx, raw_seg in enumerate(raw_segments):
            if not isinstance(raw_seg, dict):
                raise CampaignValidationError(f"segments[{seg_idx}]", "must be an object")
            score = raw_seg.get("score")
            if not isinstance(score, (int, float)) or isinstance(score, bool) or not 0 <= score <= 100:
                raise CampaignValidationError(
                    f"segments[{seg_idx}].score", "score must be a number in [0, 100]"
                )
            raw_spans = raw_seg.get("spans", [])
            if raw_spans and info.protocol == "DA":
                raise CampaignValidationError(
                    f"segments[{seg_idx}].spans", "DA submissions carry no error spans"
                )
            target = doc.segments[seg_idx].tgt[model]
            spans = []
            for s_idx, raw_span in enumerate(raw_spans):
                path = f"segments[{seg_idx}].spans[{s_idx}]"
                if not isinstance(raw_span, dict):
                    raise CampaignValidationError(path, "span must be an object")
                try:
                    span = span_from_dict(raw_span)
                except KeyError as exc:
                    raise CampaignValidationError(path, f"missing field {exc}") from exc
                if target.kind != "text":
                    raise CampaignValidationError(path, "span annotation requires a text output")
                if not (isinstance(span.start_i, int) and isinstance(span.end_i, int)
                        and 0 <= span.start_i <= span.end_i < len(target.value)):
                    raise CampaignValidationError(
                        path,
                        f"span [{span.start_i}, {span.end_i}] out of bounds "
                        f"for text of length {len(target.value)}",
                    )
                if span.severity not in ("minor", "major"):
                    raise CampaignValidationError(path, "severity must be minor or major")
                if span.origin is not None and span.origin not in SPAN_ORIGINS:
                    raise CampaignValidationError(path, f"unknown span origin {span.origin!r}")
                if info.protocol == "MQM" and not span.category:
                    raise CampaignValidationError(path, "MQM spans require a category")
                if info.protocol != "MQM" and span.category:
                    raise CampaignValidationError(path, "only MQM spans carry categories")
                spans.append(span)
            postedit = raw_seg.get("postedit")
            if postedit is not None and not info.allow_postedit:
                raise CampaignValidationError(
                    f"segments[{seg_idx}].postedit",
                    "post-editing is not enabled for this campaign",
                )
            parsed.append(SegmentAnnotation(
                score=float(score),
                spans=tuple(spans),
                postedit=postedit,
                missing=bool(raw_seg.get("missing", False)),
            ))
        return tuple(parsed)

    def _parse_action_events(self, raw_events, user_id: str, doc_index: int,
                             alias_to_model: dict[str, str]) -> list[ActionEvent]:
        if not isinstance(raw_events, list):
            raise CampaignValidationError("events", "must be a list")
        events = []
        for i, raw in enumerate(raw_events):
            if not isinstance(raw, dict):
                raise CampaignValidationError(f"events[{i}]", "must be an object")
            kind = raw.get("kind")
            if kind not in ACTION_KINDS:
                raise CampaignValidationError(f"events[{i}].kind", f"unknown action kind {kind!r}")
            alias = raw.get("model")
            model = alias_to_model.get(alias) if alias is not None else None
            if alias is not None and model is None:
                raise CampaignValidationError(f"events[{i}].model", f"unknown alias {alias!r}")
            events.append(ActionEvent(
                timestamp_ms=int(raw.get("ts", 0)),
                user_id=user_id,
                document_index=doc_index,
                segment_index=raw.get("segment"),
                model_id=model,
                kind=kind,
                payload=raw.get("payload", {}),
            ))
        return events

    # -- manager operations -------------------------------------------------------

    def dashboard(self, token: str) -> dict:
        """Progress, timing, attention rates and the annotation browser.

        Deliberately excludes model means and rankings: those are only
        available through the explicit reveal action.
        """
        with self._lock:
            state, campaign_id, _user = self._resolve(token, role="manager")
            engine = state.engine
            assert engine is not None
            progress = {u: engine.user_progress(u) for u in state.annotator_order}
            report = progress_report(progress, state.submit_times_ms, state.ledger)
            done, total = engine.campaign_progress()
            return {
                "campaign_id": campaign_id,
                "assignment": state.info.assignment,
                "protocol": state.info.protocol,
                "items_done": done,
                "items_total": total,
                "users": {u: report[u].to_dict() for u in state.annotator_order},
                "records": [r.to_dict() for r in state.records],
                "rule_outcomes": list(state.rule_outcomes),
                "bias_disclaimer": (
                    DYNAMIC_BIAS_DISCLAIMER if state.info.assignment == "dynamic" else None
                ),
            }

    def reveal_results(self, token: str, alpha: float = 0.05) -> dict:
        """Explicit results action: computes the ranking and logs the reveal."""
        with self._lock:
            state, campaign_id, user_id = self._resolve(token, role="manager")
            report = build_ranking(state.records, alpha=alpha, assignment=state.info.assignment)
            self._emit(campaign_id, "results_revealed", {"user": user_id})
            return report.to_dict()

    def redistribute(self, token: str, from_user: str, to_user: str, docs: list[int]) -> dict:
        with self._lock:
            state, campaign_id, _user = self._resolve(token, role="manager")
            engine = state.engine
            assert engine is not None
            if state.info.assignment != "task-based":
                raise UnsupportedModeError("redistribution requires task-based assignment")
            engine.check_redistribute(from_user, to_user, docs)
            self._emit(campaign_id, "tasks_redistributed",
                       {"from": from_user, "to": to_user, "docs": list(docs)})
            return {
                "from": {"user": from_user, "remaining": len(engine.tasks[from_user])},
                "to": {"user": to_user, "total": len(engine.tasks[to_user])},
            }

    # -- export ---------------------------------------------------------------

    def export_annotations(self, campaign_id: str) -> dict:
        """Full annotation output for one campaign: every record (superseded
        history included), rule outcomes, and per-action timelines."""
        with self._lock:
            state = self.campaigns.get(campaign_id)
            if state is None:
                raise NotFoundError(f"unknown campaign {campaign_id!r}")
            quality = {
                u: {
                    "checks_seen": q.checks_seen,
                    "checks_passed": q.checks_passed,
                    "tutorial_attempts": q.tutorial_attempts,
                    "tutorial_skips": q.tutorial_skips,
                }
                for u, q in sorted(state.ledger.users.items())
            }
            users = state.annotator_order + ([state.manager_id] if state.manager_id else [])
            return {
                "format_version": EXPORT_FORMAT_VERSION,
                "campaign_id": campaign_id,
                "info": state.definition.to_file_dict()["info"],
                "users": [{"user_id": u, "role": state.identities[u].role} for u in users],
                "records": [r.to_dict() for r in state.records],
                "rule_outcomes": list(state.rule_outcomes),
                "quality": quality,
                "reveals": state.reveal_count,
            }

    def export_bytes(self, campaign_id: str) -> bytes:
        # sort_keys gives identical bytes whether the state is live or replayed.
        return json.dumps(
            self.export_annotations(campaign_id), ensure_ascii=False, sort_keys=True, indent=2
        ).encode("utf-8")

    def export_for_token(self, token: str) -> bytes:
        with self._lock:
            _state, campaign_id, _user = self._resolve(token, role="manager")
            return self.export_bytes(campaign_id)

    def list_campaigns(self) -> list[dict]:
        with self._lock:
            rows = []
            for campaign_id in sorted(self.campaigns):
                state = self.campaigns[campaign_id]
                engine = state.engine
                done, total = engine.campaign_progress() if engine else (0, 0)
                rows.append({
                    "campaign_id": campaign_id,
                    "assignment": state.info.assignment,
                    "protocol": state.info.protocol,
                    "items_done": done,
                    "items_total": total,
                    "percent": round(100.0 * done / total, 1) if total else 0.0,
                })
            return rows
