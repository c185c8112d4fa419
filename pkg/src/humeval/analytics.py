"""Model rankings with significance clustering, agreement metrics, capacity math.

Rankings use a two-sided paired t-test on related samples: only items scored
for both models by the same annotator enter a pair's test. A separation line
is drawn between adjacently ranked models when their p-value falls under the
significance level. Small campaigns routinely produce undefined statistics;
those are surfaced as explicit None markers, never silently dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .errors import InputError
from .quality import QualityLedger
from .records import AnnotationRecord
from .stats import kendall_tau_b, paired_t_test, pearson

# Shown on the dashboard and attached to ranking reports for dynamic campaigns.
DYNAMIC_BIAS_DISCLAIMER = (
    "Dynamic assignment introduces selection bias: better-performing systems "
    "are sampled more often, so the significance tests below are strictly "
    "valid only for single-stream or task-based (randomized) assignment. "
    "Export the raw data and apply corrections (e.g. inverse propensity "
    "weighting or a Bonferroni adjustment) before reporting."
)


@dataclass(frozen=True)
class RankingRow:
    model_id: str
    mean: float
    n: int


@dataclass(frozen=True)
class RankingReport:
    rows: tuple[RankingRow, ...]  # descending by mean
    separations: frozenset[int]  # adjacent-pair indices i: rows[i] vs rows[i+1] distinct
    pairwise_p: tuple[tuple[float | None, ...], ...]  # aligned to rows, p(i,i) = 1
    alpha: float
    assignment: str
    bias_disclaimer: bool

    def to_dict(self) -> dict:
        return {
            "rows": [{"model": r.model_id, "mean": r.mean, "n": r.n} for r in self.rows],
            "separations": sorted(self.separations),
            "pairwise_p": [list(row) for row in self.pairwise_p],
            "alpha": self.alpha,
            "assignment": self.assignment,
            "bias_disclaimer": self.bias_disclaimer,
            "bias_disclaimer_text": DYNAMIC_BIAS_DISCLAIMER if self.bias_disclaimer else None,
        }


def _live(records: list[AnnotationRecord]) -> list[AnnotationRecord]:
    return [r for r in records if r.superseded_by is None]


def build_ranking(
    records: list[AnnotationRecord],
    alpha: float = 0.05,
    assignment: str = "single-stream",
) -> RankingReport:
    """Rank models by mean segment score with pairwise significance tests.

    Pairs are formed over (annotator, document, segment) keys scored for both
    models; a pair with fewer than 2 shared items gets an indeterminate
    p-value (None) and never a separation line.
    """
    live = _live(records)
    scores: dict[str, list[float]] = {}
    by_key: dict[str, dict[tuple[str, int, int], float]] = {}
    for rec in live:
        for seg_idx, seg in enumerate(rec.segments):
            scores.setdefault(rec.model_id, []).append(seg.score)
            by_key.setdefault(rec.model_id, {})[(rec.user_id, rec.document_index, seg_idx)] = seg.score

    rows = tuple(
        RankingRow(m, math.fsum(vals) / len(vals), len(vals))
        for m, vals in sorted(
            scores.items(), key=lambda kv: (-(math.fsum(kv[1]) / len(kv[1])), kv[0])
        )
    )

    k = len(rows)
    matrix: list[list[float | None]] = [[None] * k for _ in range(k)]
    for i in range(k):
        matrix[i][i] = 1.0
    for i, j in combinations(range(k), 2):
        a, b = rows[i].model_id, rows[j].model_id
        shared = sorted(set(by_key[a]) & set(by_key[b]))
        if len(shared) < 2:
            continue
        xs = [by_key[a][key] for key in shared]
        ys = [by_key[b][key] for key in shared]
        try:
            _t, p = paired_t_test(xs, ys)
        except InputError:
            continue
        matrix[i][j] = matrix[j][i] = p

    separations = frozenset(
        i for i in range(k - 1) if matrix[i][i + 1] is not None and matrix[i][i + 1] < alpha
    )
    return RankingReport(
        rows=rows,
        separations=separations,
        pairwise_p=tuple(tuple(row) for row in matrix),
        alpha=alpha,
        assignment=assignment,
        bias_disclaimer=(assignment == "dynamic"),
    )


# ---------------------------------------------------------------------------
# Inter-annotator agreement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IaaReport:
    global_pearson: float | None
    by_model_pearson: float | None
    by_item_tau_b: float | None
    pairs_used: int = 0

    def to_dict(self) -> dict:
        return {
            "global": self.global_pearson,
            "by_model": self.by_model_pearson,
            "by_item": self.by_item_tau_b,
            "pairs_used": self.pairs_used,
        }


def _mean_or_none(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def _pair_iaa(
    r1: dict[tuple[int, int, str], float], r2: dict[tuple[int, int, str], float]
) -> tuple[float | None, float | None, float | None]:
    """Agreement for one annotator pair over (doc, segment, model) score maps."""
    shared = sorted(set(r1) & set(r2))
    if not shared:
        return None, None, None

    xs = [r1[key] for key in shared]
    ys = [r2[key] for key in shared]
    try:
        global_r = pearson(xs, ys) if len(shared) >= 2 else None
    except InputError:
        global_r = None

    per_model: list[float] = []
    for model in sorted({m for (_d, _s, m) in shared}):
        keys = [key for key in shared if key[2] == model]
        if len(keys) < 2:
            continue
        try:
            per_model.append(pearson([r1[k] for k in keys], [r2[k] for k in keys]))
        except InputError:
            continue

    # Group by item: per shared document, compare the two annotators' score
    # vectors across that document's models (segments averaged per model).
    per_doc: list[float] = []
    for doc in sorted({d for (d, _s, _m) in shared}):
        models = sorted({m for (d, _s, m) in shared if d == doc})
        if len(models) < 2:
            continue
        vec1, vec2 = [], []
        for m in models:
            keys = [key for key in shared if key[0] == doc and key[2] == m]
            vec1.append(math.fsum(r1[k] for k in keys) / len(keys))
            vec2.append(math.fsum(r2[k] for k in keys) / len(keys))
        try:
            per_doc.append(kendall_tau_b(vec1, vec2))
        except InputError:
            continue

    return global_r, _mean_or_none(per_model), _mean_or_none(per_doc)


def iaa_report(
    records: list[AnnotationRecord],
    annotator_pairs: list[tuple[str, str]] | None = None,
) -> IaaReport:
    """Average pairwise agreement across annotators sharing scored items.

    Pearson where the scale matters (global, group-by-model), tau-b where only
    the ranking does (group-by-item). Components without enough overlap come
    back as None.
    """
    live = _live(records)
    by_user: dict[str, dict[tuple[int, int, str], float]] = {}
    for rec in live:
        u = by_user.setdefault(rec.user_id, {})
        for seg_idx, seg in enumerate(rec.segments):
            u[(rec.document_index, seg_idx, rec.model_id)] = seg.score

    if annotator_pairs is None:
        annotator_pairs = list(combinations(sorted(by_user), 2))

    globals_, by_models, by_items = [], [], []
    used = 0
    for a, b in annotator_pairs:
        if a not in by_user or b not in by_user:
            continue
        g, m, i = _pair_iaa(by_user[a], by_user[b])
        if g is None and m is None and i is None:
            continue
        used += 1
        if g is not None:
            globals_.append(g)
        if m is not None:
            by_models.append(m)
        if i is not None:
            by_items.append(i)

    return IaaReport(
        global_pearson=_mean_or_none(globals_),
        by_model_pearson=_mean_or_none(by_models),
        by_item_tau_b=_mean_or_none(by_items),
        pairs_used=used,
    )


# ---------------------------------------------------------------------------
# Capacity planning (single-server queue with Poisson arrivals)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityQuery:
    service_time_s: float  # seconds per request (1/mu)
    think_time_s: float  # seconds between one user's requests (1/lambda_user)
    sla_latency_s: float  # response-time target t
    sla_quantile: float  # fraction of requests that must meet t


@dataclass(frozen=True)
class CapacityResult:
    mu: float  # service rate, requests/s
    lambda_max: float  # highest total arrival rate meeting the SLA
    max_users: int  # floor(lambda_max * think_time)
    naive_throughput: int  # floor(think_time / service_time), ignores queueing
    feasible: bool  # False when the SLA cannot be met at any load

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "lambda_max": self.lambda_max,
            "max_users": self.max_users,
            "naive_throughput": self.naive_throughput,
            "feasible": self.feasible,
        }


def mm1_capacity(query: CapacityQuery) -> CapacityResult:
    """How many concurrent users a single-threaded server sustains under an SLA.

    The response-time distribution of an M/M/1 queue gives
    P(T <= t) = 1 - exp(-(mu - lambda) t); solving for the quantile q yields
    lambda_max = mu + ln(1 - q) / t, and the user count follows from each
    user contributing 1/think_time requests per second.
    """
    if query.service_time_s <= 0 or query.think_time_s <= 0 or query.sla_latency_s <= 0:
        raise InputError("service, think and SLA times must be positive")
    if not 0 < query.sla_quantile < 1:
        raise InputError("SLA quantile must lie in (0, 1)")
    mu = 1.0 / query.service_time_s
    lambda_max = mu + math.log(1.0 - query.sla_quantile) / query.sla_latency_s
    naive = math.floor(query.think_time_s / query.service_time_s)
    if lambda_max <= 0:
        return CapacityResult(mu, lambda_max, 0, naive, feasible=False)
    return CapacityResult(
        mu=mu,
        lambda_max=lambda_max,
        max_users=math.floor(lambda_max * query.think_time_s),
        naive_throughput=naive,
        feasible=True,
    )


# ---------------------------------------------------------------------------
# Progress diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UserProgress:
    done: int
    total: int
    mean_seconds_per_item: float | None
    attention_pass_rate: float | None
    attention_seen: int
    tutorial_attempts: int

    def to_dict(self) -> dict:
        return {
            "done": self.done,
            "total": self.total,
            "mean_seconds_per_item": self.mean_seconds_per_item,
            "attention_pass_rate": self.attention_pass_rate,
            "attention_seen": self.attention_seen,
            "tutorial_attempts": self.tutorial_attempts,
        }


def progress_report(
    progress: dict[str, tuple[int, int]],
    submit_times_ms: dict[str, list[int]],
    ledger: QualityLedger,
) -> dict[str, UserProgress]:
    """Per-user progress, pacing and attention stats for the dashboard.

    Pacing comes from the gaps between consecutive submit events, so a user
    with fewer than two submissions has undefined timing.
    """
    out: dict[str, UserProgress] = {}
    for user_id, (done, total) in progress.items():
        times = sorted(submit_times_ms.get(user_id, []))
        mean_s = None
        if len(times) >= 2:
            gaps = [(b - a) / 1000.0 for a, b in zip(times, times[1:])]
            mean_s = math.fsum(gaps) / len(gaps)
        quality = ledger.for_user(user_id)
        out[user_id] = UserProgress(
            done=done,
            total=total,
            mean_seconds_per_item=mean_s,
            attention_pass_rate=quality.pass_rate,
            attention_seen=quality.checks_seen,
            tutorial_attempts=quality.tutorial_attempts,
        )
    return out
