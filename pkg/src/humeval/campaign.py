"""Campaign definition files: types, parsing, validation, and link provisioning.

A campaign file is a JSON document with three top-level keys:

    {"campaign_id": ..., "info": {...}, "data": [...]}

`data` is assignment-shaped. For task-based campaigns it is a list of tasks,
each task an ordered list of documents (one task per annotator link). For the
pooled modes (single-stream, dynamic) it is a flat list of documents. A
document is a list of segments; a segment carries `src`, optional `ref`, a
`tgt` map from model id to output, and optional `validation` /
`prefilled_spans` maps keyed by model id.

Parsing is strict: unknown keys anywhere in the file are rejected so that a
typo like "dynamic_tpo" fails at add time instead of silently misconfiguring
a live campaign. All span indices are Unicode scalar-value offsets into the
target text (Python string indices), never bytes or UTF-16 units.
"""

from __future__ import annotations

import json
import random
import secrets
from dataclasses import dataclass, field

from .errors import CampaignParseError, CampaignValidationError
from .wordlists import ADJECTIVES, NOUNS

ASSIGNMENTS = ("task-based", "single-stream", "dynamic")
PROTOCOLS = ("DA", "ESA", "MQM", "ESA^AI")
SEVERITIES = ("minor", "major")
SPAN_PROTOCOLS = ("ESA", "MQM", "ESA^AI")

# Magic-link tokens carry exactly 96 bits of entropy. In the URL-safe base64
# alphabet (6 bits per symbol, 12 bytes divisible by 3) that is 16 symbols
# with no padding.
TOKEN_BYTES = 12
TOKEN_LENGTH = 16

DEFAULT_ATTENTION_THRESHOLD = 0.8

# Annotator-facing slider anchors for the default 0-100 quality scale.
DEFAULT_SLIDER_ANCHORS = (
    (0, "Nonsense: most information is lost."),
    (33, "Broken: major gaps and narrative issues."),
    (66, "Middling: minor issues with grammar or consistency."),
    (100, "Perfect: meaning and grammar align completely with the source."),
)


@dataclass(frozen=True)
class Content:
    """One source/reference/output payload: plain text or a multimodal resource."""

    kind: str  # text | audio | video | html
    value: str


@dataclass(frozen=True)
class ErrorSpan:
    """A concrete marked span: inclusive character offsets into the target text."""

    start_i: int
    end_i: int
    severity: str
    category: str | None = None  # MQM only, e.g. "Accuracy/Overtranslated"
    origin: str | None = None  # human | prefilled | prefilled-edited


@dataclass(frozen=True)
class ExpectedSpan:
    """What a validation rule expects: acceptable ranges for span endpoints."""

    start_range: tuple[int, int]
    end_range: tuple[int, int]
    severity: str


@dataclass(frozen=True)
class ValidationRule:
    """A tutorial (has `warning`) or silent attention check (no `warning`)."""

    warning: str | None = None
    score_range: tuple[float, float] | None = None
    expected_spans: tuple[ExpectedSpan, ...] = ()
    score_greaterthan: str | None = None
    allow_skip: bool = False

    @property
    def blocking(self) -> bool:
        return self.warning is not None


@dataclass(frozen=True)
class SegmentItem:
    src: Content
    tgt: dict[str, Content]
    ref: Content | None = None
    validation: dict[str, tuple[ValidationRule, ...]] = field(default_factory=dict)
    prefilled_spans: dict[str, tuple[ErrorSpan, ...]] = field(default_factory=dict)

    @property
    def model_ids(self) -> tuple[str, ...]:
        """Model ids in file order (dict insertion order is preserved)."""
        return tuple(self.tgt.keys())


@dataclass(frozen=True)
class Document:
    segments: tuple[SegmentItem, ...]
    instructions: str | None = None

    @property
    def model_ids(self) -> tuple[str, ...]:
        return self.segments[0].model_ids

    @property
    def contrastive(self) -> bool:
        return len(self.model_ids) >= 2


@dataclass(frozen=True)
class CustomSlider:
    name: str
    anchors: tuple[str, ...]


@dataclass(frozen=True)
class CampaignInfo:
    assignment: str
    protocol: str
    users: int | None = None
    shuffle: bool = True
    dynamic_top: int | None = None
    dynamic_first: int = 0
    dynamic_backoff: float = 0.0
    dynamic_contrastive_models: int | None = None
    custom_sliders: tuple[CustomSlider, ...] = ()
    allow_postedit: bool = False
    allow_redo: bool = False
    attention_threshold: float = DEFAULT_ATTENTION_THRESHOLD


@dataclass(frozen=True)
class CampaignDefinition:
    campaign_id: str
    info: CampaignInfo
    documents: tuple[Document, ...]
    # Task-based only: per-task tuples of indices into `documents`.
    tasks: tuple[tuple[int, ...], ...] | None = None

    @property
    def model_ids(self) -> tuple[str, ...]:
        """All distinct model ids across the campaign, in first-seen order."""
        seen: dict[str, None] = {}
        for doc in self.documents:
            for m in doc.model_ids:
                seen.setdefault(m)
        return tuple(seen)

    @property
    def annotator_slots(self) -> int:
        if self.tasks is not None:
            return len(self.tasks)
        assert self.info.users is not None
        return self.info.users

    def to_file_dict(self) -> dict:
        """Reconstruct the campaign-file JSON shape (defaults included)."""
        info: dict = {
            "assignment": self.info.assignment,
            "protocol": self.info.protocol,
            "shuffle": self.info.shuffle,
        }
        if self.info.users is not None:
            info["users"] = self.info.users
        if self.info.assignment == "dynamic":
            info["dynamic_top"] = self.info.dynamic_top
            info["dynamic_first"] = self.info.dynamic_first
            info["dynamic_backoff"] = self.info.dynamic_backoff
            if self.info.dynamic_contrastive_models is not None:
                info["dynamic_contrastive_models"] = self.info.dynamic_contrastive_models
        if self.info.custom_sliders:
            info["custom_sliders"] = [
                {"name": s.name, "anchors": list(s.anchors)} for s in self.info.custom_sliders
            ]
        if self.info.allow_postedit:
            info["allow_postedit"] = True
        if self.info.allow_redo:
            info["allow_redo"] = True
        if self.info.attention_threshold != DEFAULT_ATTENTION_THRESHOLD:
            info["attention_threshold"] = self.info.attention_threshold

        def content_out(c: Content):
            return c.value if c.kind == "text" else {"kind": c.kind, "value": c.value}

        def segment_out(seg: SegmentItem, instructions: str | None) -> dict:
            out: dict = {}
            if instructions is not None:
                out["instructions"] = instructions
            out["src"] = content_out(seg.src)
            if seg.ref is not None:
                out["ref"] = content_out(seg.ref)
            out["tgt"] = {m: content_out(c) for m, c in seg.tgt.items()}
            if seg.validation:
                out["validation"] = {
                    m: [_rule_out(r) for r in rules] for m, rules in seg.validation.items()
                }
            if seg.prefilled_spans:
                out["prefilled_spans"] = {
                    m: [{"start_i": s.start_i, "end_i": s.end_i, "severity": s.severity}
                        for s in spans]
                    for m, spans in seg.prefilled_spans.items()
                }
            return out

        def document_out(doc: Document) -> list:
            return [
                segment_out(seg, doc.instructions if i == 0 else None)
                for i, seg in enumerate(doc.segments)
            ]

        if self.tasks is not None:
            data = [[document_out(self.documents[i]) for i in task] for task in self.tasks]
        else:
            data = [document_out(doc) for doc in self.documents]
        return {"campaign_id": self.campaign_id, "info": info, "data": data}


def _rule_out(rule: ValidationRule) -> dict:
    out: dict = {}
    if rule.warning is not None:
        out["warning"] = rule.warning
    if rule.score_range is not None:
        out["score"] = list(rule.score_range)
    if rule.expected_spans:
        out["error_spans"] = [
            {"start_i": list(s.start_range), "end_i": list(s.end_range), "severity": s.severity}
            for s in rule.expected_spans
        ]
    if rule.score_greaterthan is not None:
        out["score_greaterthan"] = rule.score_greaterthan
    if rule.allow_skip:
        out["allow_skip"] = True
    return out


@dataclass(frozen=True)
class UserIdentity:
    user_id: str  # word-word-number, no PII
    token: str  # 96-bit URL-safe magic-link token
    role: str  # annotator | manager


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------


def _fail(path: str, message: str) -> CampaignValidationError:
    return CampaignValidationError(path, message)


def _check_keys(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise _fail(path, f"unknown key(s): {', '.join(sorted(unknown))}")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise _fail(f"{path}.{key}", "required field is missing")
    return obj[key]


def _parse_content(value, path: str) -> Content:
    if isinstance(value, str):
        if not value.strip():
            raise _fail(path, "text content is empty")
        return Content("text", value)
    if isinstance(value, dict):
        _check_keys(value, {"kind", "value"}, path)
        kind = _require(value, "kind", path)
        payload = _require(value, "value", path)
        if kind not in ("text", "audio", "video", "html"):
            raise _fail(f"{path}.kind", f"unknown content kind {kind!r}")
        if not isinstance(payload, str) or (kind == "text" and not payload.strip()):
            raise _fail(f"{path}.value", "content value must be a non-empty string")
        return Content(kind, payload)
    raise _fail(path, "content must be a string or a {kind, value} object")


def _parse_index_range(value, path: str) -> tuple[int, int]:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
        raise _fail(path, "expected a [lo, hi] pair of integers")
    lo, hi = value
    if lo < 0 or lo > hi:
        raise _fail(path, f"invalid range [{lo}, {hi}]")
    return (lo, hi)


def _parse_expected_span(obj, path: str) -> ExpectedSpan:
    if not isinstance(obj, dict):
        raise _fail(path, "expected span must be an object")
    _check_keys(obj, {"start_i", "end_i", "severity"}, path)
    start = _parse_index_range(_require(obj, "start_i", path), f"{path}.start_i")
    end = _parse_index_range(_require(obj, "end_i", path), f"{path}.end_i")
    severity = _require(obj, "severity", path)
    if severity not in SEVERITIES:
        raise _fail(f"{path}.severity", f"severity must be one of {SEVERITIES}")
    if start[0] > end[1]:
        raise _fail(path, "start_i range begins after end_i range closes")
    return ExpectedSpan(start, end, severity)


def _parse_rule(obj, model_ids: tuple[str, ...], protocol: str, path: str) -> ValidationRule:
    if not isinstance(obj, dict):
        raise _fail(path, "validation rule must be an object")
    _check_keys(obj, {"warning", "score", "error_spans", "score_greaterthan", "allow_skip"}, path)

    warning = obj.get("warning")
    if warning is not None and (not isinstance(warning, str) or not warning):
        raise _fail(f"{path}.warning", "warning must be a non-empty string")

    score_range = None
    if "score" in obj:
        raw = obj["score"]
        if (not isinstance(raw, list) or len(raw) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
            raise _fail(f"{path}.score", "expected a [min, max] pair")
        lo, hi = float(raw[0]), float(raw[1])
        if not (0 <= lo <= hi <= 100):
            raise _fail(f"{path}.score", f"score range [{lo}, {hi}] must satisfy 0 <= min <= max <= 100")
        score_range = (lo, hi)

    expected = []
    if "error_spans" in obj:
        if protocol == "DA":
            raise _fail(f"{path}.error_spans", "DA has no span annotation; expected spans cannot be checked")
        raw_spans = obj["error_spans"]
        if not isinstance(raw_spans, list):
            raise _fail(f"{path}.error_spans", "expected a list of spans")
        expected = [
            _parse_expected_span(s, f"{path}.error_spans[{i}]") for i, s in enumerate(raw_spans)
        ]

    greaterthan = obj.get("score_greaterthan")
    if greaterthan is not None:
        if not isinstance(greaterthan, str):
            raise _fail(f"{path}.score_greaterthan", "must be a model id string")
        if greaterthan not in model_ids:
            raise _fail(
                f"{path}.score_greaterthan",
                f"references model {greaterthan!r} not present on this segment",
            )

    allow_skip = obj.get("allow_skip", False)
    if not isinstance(allow_skip, bool):
        raise _fail(f"{path}.allow_skip", "must be a boolean")

    return ValidationRule(warning, score_range, tuple(expected), greaterthan, allow_skip)


def _parse_segment(obj, protocol: str, first: bool, path: str) -> tuple[SegmentItem, str | None]:
    if not isinstance(obj, dict):
        raise _fail(path, "segment must be an object")
    _check_keys(obj, {"src", "ref", "tgt", "validation", "prefilled_spans", "instructions"}, path)

    instructions = obj.get("instructions")
    if instructions is not None:
        if not first:
            raise _fail(f"{path}.instructions", "instructions are only allowed on the first segment of a document")
        if not isinstance(instructions, str):
            raise _fail(f"{path}.instructions", "must be a string")

    src = _parse_content(_require(obj, "src", path), f"{path}.src")
    ref = _parse_content(obj["ref"], f"{path}.ref") if "ref" in obj else None

    raw_tgt = _require(obj, "tgt", path)
    if not isinstance(raw_tgt, dict) or not raw_tgt:
        raise _fail(f"{path}.tgt", "tgt must be a non-empty map from model id to output")
    tgt = {m: _parse_content(v, f"{path}.tgt.{m}") for m, v in raw_tgt.items()}
    model_ids = tuple(tgt.keys())

    validation: dict[str, tuple[ValidationRule, ...]] = {}
    if "validation" in obj:
        raw_val = obj["validation"]
        if not isinstance(raw_val, dict):
            raise _fail(f"{path}.validation", "validation must be a map from model id to rule list")
        for m, rules in raw_val.items():
            if m not in tgt:
                raise _fail(f"{path}.validation.{m}", f"model {m!r} is not present in tgt")
            if not isinstance(rules, list):
                raise _fail(f"{path}.validation.{m}", "expected a list of rules")
            validation[m] = tuple(
                _parse_rule(r, model_ids, protocol, f"{path}.validation.{m}[{i}]")
                for i, r in enumerate(rules)
            )

    prefilled: dict[str, tuple[ErrorSpan, ...]] = {}
    if "prefilled_spans" in obj:
        if protocol != "ESA^AI":
            raise _fail(f"{path}.prefilled_spans", "prefilled spans are only valid for the ESA^AI protocol")
        raw_pre = obj["prefilled_spans"]
        if not isinstance(raw_pre, dict):
            raise _fail(f"{path}.prefilled_spans", "must be a map from model id to span list")
        for m, spans in raw_pre.items():
            if m not in tgt:
                raise _fail(f"{path}.prefilled_spans.{m}", f"model {m!r} is not present in tgt")
            if tgt[m].kind != "text":
                raise _fail(f"{path}.prefilled_spans.{m}", "span annotation is only defined for text outputs")
            if not isinstance(spans, list):
                raise _fail(f"{path}.prefilled_spans.{m}", "expected a list of spans")
            text_len = len(tgt[m].value)
            parsed = []
            for i, s in enumerate(spans):
                span_path = f"{path}.prefilled_spans.{m}[{i}]"
                if not isinstance(s, dict):
                    raise _fail(span_path, "span must be an object")
                _check_keys(s, {"start_i", "end_i", "severity"}, span_path)
                start_i = _require(s, "start_i", span_path)
                end_i = _require(s, "end_i", span_path)
                severity = _require(s, "severity", span_path)
                if not all(isinstance(v, int) and not isinstance(v, bool) for v in (start_i, end_i)):
                    raise _fail(span_path, "start_i and end_i must be integers")
                if severity not in SEVERITIES:
                    raise _fail(f"{span_path}.severity", f"severity must be one of {SEVERITIES}")
                if not (0 <= start_i <= end_i < text_len):
                    raise _fail(
                        span_path,
                        f"span [{start_i}, {end_i}] out of bounds for target text of length {text_len}",
                    )
                parsed.append(ErrorSpan(start_i, end_i, severity, origin="prefilled"))
            prefilled[m] = tuple(parsed)

    return SegmentItem(src, tgt, ref, validation, prefilled), instructions


def _parse_document(obj, protocol: str, path: str) -> Document:
    if not isinstance(obj, list) or not obj:
        raise _fail(path, "document must be a non-empty list of segments")
    segments = []
    instructions = None
    for i, raw_seg in enumerate(obj):
        seg, instr = _parse_segment(raw_seg, protocol, first=(i == 0), path=f"{path}[{i}]")
        if instr is not None:
            instructions = instr
        segments.append(seg)
    first_models = set(segments[0].model_ids)
    for i, seg in enumerate(segments[1:], start=1):
        if set(seg.model_ids) != first_models:
            raise _fail(
                f"{path}[{i}].tgt",
                "all segments of a document must expose the same model ids",
            )
    return Document(tuple(segments), instructions)


_INFO_KEYS = {
    "assignment", "protocol", "users", "shuffle",
    "dynamic_top", "dynamic_first", "dynamic_backoff", "dynamic_contrastive_models",
    "custom_sliders", "allow_postedit", "allow_redo", "attention_threshold",
}


def _parse_info(obj, path: str = "info") -> CampaignInfo:
    if not isinstance(obj, dict):
        raise _fail(path, "info must be an object")
    _check_keys(obj, _INFO_KEYS, path)

    assignment = _require(obj, "assignment", path)
    if assignment not in ASSIGNMENTS:
        raise _fail(f"{path}.assignment", f"must be one of {ASSIGNMENTS}")
    protocol = _require(obj, "protocol", path)
    if protocol not in PROTOCOLS:
        raise _fail(f"{path}.protocol", f"must be one of {PROTOCOLS}")

    users = obj.get("users")
    if users is not None and (not isinstance(users, int) or isinstance(users, bool) or users < 1):
        raise _fail(f"{path}.users", "must be a positive integer")

    shuffle = obj.get("shuffle", True)
    if not isinstance(shuffle, bool):
        raise _fail(f"{path}.shuffle", "must be a boolean")

    if assignment != "dynamic":
        for key in ("dynamic_top", "dynamic_first", "dynamic_backoff", "dynamic_contrastive_models"):
            if key in obj:
                raise _fail(f"{path}.{key}", f"only meaningful when assignment is 'dynamic' (got {assignment!r})")

    dynamic_top = obj.get("dynamic_top")
    if assignment == "dynamic":
        if dynamic_top is None:
            raise _fail(f"{path}.dynamic_top", "required for dynamic assignment")
        if not isinstance(dynamic_top, int) or isinstance(dynamic_top, bool) or dynamic_top < 1:
            raise _fail(f"{path}.dynamic_top", "must be a positive integer")

    dynamic_first = obj.get("dynamic_first", 0)
    if not isinstance(dynamic_first, int) or isinstance(dynamic_first, bool) or dynamic_first < 0:
        raise _fail(f"{path}.dynamic_first", "must be a non-negative integer")

    dynamic_backoff = obj.get("dynamic_backoff", 0.0)
    if (not isinstance(dynamic_backoff, (int, float)) or isinstance(dynamic_backoff, bool)
            or not 0 <= dynamic_backoff <= 1):
        raise _fail(f"{path}.dynamic_backoff", "must be a probability in [0, 1]")

    width = obj.get("dynamic_contrastive_models")
    if width is not None and (not isinstance(width, int) or isinstance(width, bool) or width < 2):
        raise _fail(f"{path}.dynamic_contrastive_models", "must be an integer >= 2")

    sliders = []
    if "custom_sliders" in obj:
        raw_sliders = obj["custom_sliders"]
        if not isinstance(raw_sliders, list) or not raw_sliders:
            raise _fail(f"{path}.custom_sliders", "must be a non-empty list")
        for i, s in enumerate(raw_sliders):
            spath = f"{path}.custom_sliders[{i}]"
            if not isinstance(s, dict):
                raise _fail(spath, "slider must be an object")
            _check_keys(s, {"name", "anchors"}, spath)
            name = _require(s, "name", spath)
            anchors = s.get("anchors", [])
            if not isinstance(name, str) or not name:
                raise _fail(f"{spath}.name", "must be a non-empty string")
            if not isinstance(anchors, list) or not all(isinstance(a, str) for a in anchors):
                raise _fail(f"{spath}.anchors", "must be a list of strings")
            sliders.append(CustomSlider(name, tuple(anchors)))

    allow_postedit = obj.get("allow_postedit", False)
    allow_redo = obj.get("allow_redo", False)
    for key, val in (("allow_postedit", allow_postedit), ("allow_redo", allow_redo)):
        if not isinstance(val, bool):
            raise _fail(f"{path}.{key}", "must be a boolean")

    threshold = obj.get("attention_threshold", DEFAULT_ATTENTION_THRESHOLD)
    if (not isinstance(threshold, (int, float)) or isinstance(threshold, bool)
            or not 0 <= threshold <= 1):
        raise _fail(f"{path}.attention_threshold", "must be in [0, 1]")

    return CampaignInfo(
        assignment=assignment,
        protocol=protocol,
        users=users,
        shuffle=shuffle,
        dynamic_top=dynamic_top,
        dynamic_first=dynamic_first,
        dynamic_backoff=float(dynamic_backoff),
        dynamic_contrastive_models=width,
        custom_sliders=tuple(sliders),
        allow_postedit=allow_postedit,
        allow_redo=allow_redo,
        attention_threshold=float(threshold),
    )


def parse_campaign(raw: bytes | str) -> CampaignDefinition:
    """Parse and fully validate a campaign file.

    Raises CampaignParseError for malformed JSON (with line/column) and
    CampaignValidationError naming the offending path for schema violations.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CampaignParseError(f"campaign file is not valid UTF-8: {exc}") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CampaignParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc

    if not isinstance(obj, dict):
        raise _fail("$", "campaign file must be a JSON object")
    _check_keys(obj, {"campaign_id", "info", "data"}, "$")

    campaign_id = _require(obj, "campaign_id", "$")
    if not isinstance(campaign_id, str) or not campaign_id:
        raise _fail("campaign_id", "must be a non-empty string")
    if not all(c.isalnum() or c in "._-" for c in campaign_id):
        raise _fail("campaign_id", "may only contain alphanumerics, '.', '_' and '-'")

    info = _parse_info(_require(obj, "info", "$"))

    data = _require(obj, "data", "$")
    if not isinstance(data, list) or not data:
        raise _fail("data", "must be a non-empty list")

    documents: list[Document] = []
    tasks: tuple[tuple[int, ...], ...] | None = None

    if info.assignment == "task-based":
        task_list = []
        for t, raw_task in enumerate(data):
            if not isinstance(raw_task, list) or not raw_task:
                raise _fail(f"data[{t}]", "each task must be a non-empty list of documents")
            indices = []
            for d, raw_doc in enumerate(raw_task):
                doc = _parse_document(raw_doc, info.protocol, f"data[{t}][{d}]")
                indices.append(len(documents))
                documents.append(doc)
            task_list.append(tuple(indices))
        tasks = tuple(task_list)
        if info.users is not None and info.users != len(tasks):
            raise _fail(
                "info.users",
                f"users ({info.users}) must equal the number of tasks ({len(tasks)})",
            )
    else:
        if info.users is None:
            raise _fail("info.users", "required for pooled assignment modes")
        for d, raw_doc in enumerate(data):
            documents.append(_parse_document(raw_doc, info.protocol, f"data[{d}]"))

    definition = CampaignDefinition(campaign_id, info, tuple(documents), tasks)

    model_ids = definition.model_ids
    if info.assignment == "dynamic":
        assert info.dynamic_top is not None
        if info.dynamic_top > len(model_ids):
            raise _fail(
                "info.dynamic_top",
                f"dynamic_top ({info.dynamic_top}) exceeds the number of distinct models ({len(model_ids)})",
            )
        if info.dynamic_contrastive_models is not None:
            if info.dynamic_contrastive_models > len(model_ids):
                raise _fail(
                    "info.dynamic_contrastive_models",
                    f"width ({info.dynamic_contrastive_models}) exceeds model count ({len(model_ids)})",
                )
        # Per-(document, model) bandit bookkeeping needs a uniform model set.
        universe = set(model_ids)
        for d, doc in enumerate(documents):
            if set(doc.model_ids) != universe:
                raise _fail(
                    f"data[{d}]",
                    "dynamic assignment requires every document to expose the same model set",
                )

    return definition


def parse_campaign_file(path) -> CampaignDefinition:
    with open(path, "rb") as fh:
        return parse_campaign(fh.read())


# ---------------------------------------------------------------------------
# Magic links
# ---------------------------------------------------------------------------


def _new_user_id(rng: random.Random, taken: set[str]) -> str:
    while True:
        uid = f"{rng.choice(ADJECTIVES)}-{rng.choice(NOUNS)}-{rng.randint(100, 999)}"
        if uid not in taken:
            taken.add(uid)
            return uid


def new_token() -> str:
    token = secrets.token_urlsafe(TOKEN_BYTES)
    assert len(token) == TOKEN_LENGTH
    return token


def generate_links(
    definition: CampaignDefinition, base_url: str
) -> tuple[list[tuple[UserIdentity, str]], tuple[UserIdentity, str]]:
    """Provision one magic link per annotator slot plus one manager link.

    Returns ([(annotator, url), ...], (manager, url)). Tokens carry 96 bits
    of cryptographic entropy each; user ids are human-readable and carry no
    identifying information.
    """
    base = base_url.rstrip("/")
    rng = random.Random(secrets.randbits(64))
    taken: set[str] = set()
    tokens: set[str] = set()

    def issue(role: str) -> tuple[UserIdentity, str]:
        token = new_token()
        while token in tokens:  # pragma: no cover - 96-bit collision
            token = new_token()
        tokens.add(token)
        identity = UserIdentity(_new_user_id(rng, taken), token, role)
        return identity, f"{base}/?token={token}"

    annotators = [issue("annotator") for _ in range(definition.annotator_slots)]
    manager = issue("manager")
    return annotators, manager


def shuffle_model_order(document: Document, seed) -> list[str]:
    """Deterministic permutation of a document's model ids for display.

    The same (document, seed) always yields the same order. Callers honoring
    `info.shuffle == false` must bypass this and use file order directly.
    """
    order = list(document.model_ids)
    if len(order) <= 1:
        return order
    rng = random.Random(f"{seed}|{','.join(order)}")
    rng.shuffle(order)
    return order
