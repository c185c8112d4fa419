"""Tutorial and attention-check evaluation, pass-rate tracking, verdict tokens.

A rule with a `warning` is a tutorial: it blocks the submission and shows the
warning until its conditions are met (or the annotator uses the skip button,
when allowed). A rule without a warning is a silent attention check: the
outcome is recorded for the dashboard and the annotator is never notified.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field

from .campaign import ErrorSpan, ExpectedSpan, ValidationRule
from .errors import InputError, StateError


@dataclass(frozen=True)
class RuleOutcome:
    passed: bool
    blocking: bool
    warning: str | None
    failed_conditions: tuple[str, ...]


def match_expected_span(expected: ExpectedSpan, spans: list[ErrorSpan]) -> bool:
    """True iff some submitted span starts/ends inside the expected ranges
    with the same severity. Extra submitted spans never cause failure."""
    s_lo, s_hi = expected.start_range
    e_lo, e_hi = expected.end_range
    return any(
        s_lo <= span.start_i <= s_hi
        and e_lo <= span.end_i <= e_hi
        and span.severity == expected.severity
        for span in spans
    )


def evaluate_rule(
    rule: ValidationRule,
    score: float,
    spans: list[ErrorSpan],
    comparator_scores: dict[str, float] | None = None,
) -> RuleOutcome:
    """Evaluate one rule against one (segment, model) submission.

    `comparator_scores` maps model id to that model's score on the same
    segment; required whenever the rule carries `score_greaterthan`.
    """
    failed: list[str] = []

    if rule.score_range is not None:
        lo, hi = rule.score_range
        if not (lo <= score <= hi):
            failed.append("score_range")

    if rule.expected_spans:
        if not all(match_expected_span(e, spans) for e in rule.expected_spans):
            failed.append("expected_span")

    if rule.score_greaterthan is not None:
        comparators = comparator_scores or {}
        if rule.score_greaterthan not in comparators:
            raise InputError(
                f"score_greaterthan references {rule.score_greaterthan!r} "
                "but no comparator score was provided"
            )
        # "must score higher" is strict.
        if not score > comparators[rule.score_greaterthan]:
            failed.append("score_greaterthan")

    passed = not failed
    return RuleOutcome(
        passed=passed,
        blocking=rule.blocking,
        warning=rule.warning if rule.blocking else None,
        failed_conditions=tuple(failed),
    )


@dataclass
class UserQuality:
    checks_seen: int = 0
    checks_passed: int = 0
    tutorial_attempts: int = 0
    tutorial_skips: int = 0

    @property
    def pass_rate(self) -> float | None:
        if self.checks_seen == 0:
            return None
        return self.checks_passed / self.checks_seen


@dataclass
class QualityLedger:
    """Per-user attention-check and tutorial bookkeeping for one campaign."""

    threshold: float = 0.8
    users: dict[str, UserQuality] = field(default_factory=dict)

    def for_user(self, user_id: str) -> UserQuality:
        """Read-only view; never inserts (reads must not change replayable state)."""
        return self.users.get(user_id, UserQuality())

    def _entry(self, user_id: str) -> UserQuality:
        return self.users.setdefault(user_id, UserQuality())

    def record_check(self, user_id: str, passed: bool) -> None:
        entry = self._entry(user_id)
        entry.checks_seen += 1
        if passed:
            entry.checks_passed += 1

    def record_tutorial_attempt(self, user_id: str) -> None:
        self._entry(user_id).tutorial_attempts += 1

    def record_tutorial_skip(self, user_id: str) -> None:
        self._entry(user_id).tutorial_skips += 1

    def verdict(self, user_id: str) -> str:
        """accept iff no checks were configured or pass rate >= threshold."""
        entry = self.for_user(user_id)
        if entry.checks_seen == 0:
            return "accept"
        return "accept" if entry.checks_passed / entry.checks_seen >= self.threshold else "reject"


def completion_token(
    ledger: QualityLedger,
    campaign_id: str,
    user_id: str,
    secret: str,
    complete: bool = True,
) -> dict:
    """Verdict plus an offline-verifiable token for crowdsourcing platforms.

    The token is a keyed digest of (campaign_id, user_id, verdict), so a
    manager holding the campaign secret can re-derive and check it without
    server access. Printable, safe to paste into platform forms.
    """
    if not complete:
        raise StateError(f"user {user_id} has not completed their assignment")
    verdict = ledger.verdict(user_id)
    digest = hmac.new(
        secret.encode("utf-8"),
        f"{campaign_id}:{user_id}:{verdict}".encode("utf-8"),
        hashlib.sha256,
    ).hexdigest()[:16]
    return {"verdict": verdict, "token": f"{verdict.upper()}-{digest}"}


def verify_completion_token(
    token: str, campaign_id: str, user_id: str, secret: str
) -> bool:
    """Offline check that a pasted token matches (campaign, user, verdict)."""
    for verdict in ("accept", "reject"):
        digest = hmac.new(
            secret.encode("utf-8"),
            f"{campaign_id}:{user_id}:{verdict}".encode("utf-8"),
            hashlib.sha256,
        ).hexdigest()[:16]
        if hmac.compare_digest(token, f"{verdict.upper()}-{digest}"):
            return True
    return False
