"""Annotation records and per-action events, with stable dict round-trips.

These are the payloads that travel through the event log and the export, so
`to_dict`/`from_dict` must be loss-free and key-stable: exports are diffed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .campaign import ErrorSpan

ACTION_KINDS = (
    "span_create",
    "span_delete",
    "severity_change",
    "score_set",
    "comment_set",
    "tutorial_fail",
    "tutorial_skip",
    "submit",
)

SPAN_ORIGINS = ("human", "prefilled", "prefilled-edited")


@dataclass(frozen=True)
class ActionEvent:
    """One fine-grained annotator action, timestamped in ms since campaign epoch."""

    timestamp_ms: int
    user_id: str
    document_index: int
    segment_index: int | None
    model_id: str | None
    kind: str
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ts": self.timestamp_ms,
            "user": self.user_id,
            "doc": self.document_index,
            "segment": self.segment_index,
            "model": self.model_id,
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActionEvent":
        return cls(
            timestamp_ms=d["ts"],
            user_id=d["user"],
            document_index=d["doc"],
            segment_index=d.get("segment"),
            model_id=d.get("model"),
            kind=d["kind"],
            payload=d.get("payload", {}),
        )


def span_to_dict(span: ErrorSpan) -> dict:
    out = {"start_i": span.start_i, "end_i": span.end_i, "severity": span.severity}
    if span.category is not None:
        out["category"] = span.category
    if span.origin is not None:
        out["origin"] = span.origin
    return out


def span_from_dict(d: dict) -> ErrorSpan:
    return ErrorSpan(
        start_i=d["start_i"],
        end_i=d["end_i"],
        severity=d["severity"],
        category=d.get("category"),
        origin=d.get("origin"),
    )


@dataclass(frozen=True)
class SegmentAnnotation:
    score: float
    spans: tuple[ErrorSpan, ...] = ()
    postedit: str | None = None
    missing: bool = False

    def to_dict(self) -> dict:
        out: dict = {"score": self.score, "spans": [span_to_dict(s) for s in self.spans]}
        if self.postedit is not None:
            out["postedit"] = self.postedit
        if self.missing:
            out["missing"] = True
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentAnnotation":
        return cls(
            score=d["score"],
            spans=tuple(span_from_dict(s) for s in d.get("spans", [])),
            postedit=d.get("postedit"),
            missing=d.get("missing", False),
        )


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's judgment of one (document, model)."""

    user_id: str
    document_index: int
    model_id: str
    segments: tuple[SegmentAnnotation, ...]
    comment: str | None = None
    action_events: tuple[ActionEvent, ...] = ()
    sequence: int | None = None  # log sequence that persisted this record
    superseded_by: int | None = None  # set when re-done, never deleted

    @property
    def scores(self) -> list[float]:
        return [seg.score for seg in self.segments]

    def to_dict(self) -> dict:
        return {
            "user": self.user_id,
            "doc": self.document_index,
            "model": self.model_id,
            "segments": [seg.to_dict() for seg in self.segments],
            "comment": self.comment,
            "events": [e.to_dict() for e in self.action_events],
            "sequence": self.sequence,
            "superseded_by": self.superseded_by,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            user_id=d["user"],
            document_index=d["doc"],
            model_id=d["model"],
            segments=tuple(SegmentAnnotation.from_dict(s) for s in d["segments"]),
            comment=d.get("comment"),
            action_events=tuple(ActionEvent.from_dict(e) for e in d.get("events", [])),
            sequence=d.get("sequence"),
            superseded_by=d.get("superseded_by"),
        )
