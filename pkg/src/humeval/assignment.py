"""Assignment strategies: which item each annotator sees next.

Three strategies share one engine. Task-based walks a fixed per-user document
list. Single-stream draws uniformly from the shared pool of unannotated
documents. Dynamic runs epsilon-greedy bandit selection over models: a warm-up
phase samples every model a minimum number of times, then each draw explores
uniformly with the backoff probability and otherwise exploits the current
top models by running mean.

An issued item is held "in flight" so no second annotator receives it while
the first is working. Holds expire after a timeout (annotator dropout must not
starve the pool) and, when only in-flight items remain, the stalest hold is
reissued to the requester; that reissue is the source of occasional double
annotations in pooled campaigns.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .campaign import CampaignDefinition, shuffle_model_order
from .errors import AuthorizationError, ConfigurationError, ConflictError, UnsupportedModeError

# Holds older than this return to the pool.
IN_FLIGHT_TIMEOUT_S = 30 * 60


@dataclass(frozen=True)
class ItemRef:
    document_index: int
    model_ids: tuple[str, ...]  # display order, already shuffled
    progress: tuple[int, int]  # (items done, items total) for the requesting user


@dataclass(frozen=True)
class CampaignComplete:
    pass


@dataclass
class ModelStats:
    """Running per-model aggregates consumed by the dynamic strategy."""

    n: int = 0  # completed segment scores
    total: float = 0.0
    doc_evals: int = 0  # completed (document, model) evaluations

    @property
    def mean(self) -> float | None:
        return self.total / self.n if self.n else None


@dataclass
class DynamicParams:
    dynamic_top: int
    dynamic_first: int = 0
    dynamic_backoff: float = 0.0


def _top_models(stats: dict[str, ModelStats], models: list[str], k: int) -> list[str]:
    # Undefined means sort first (optimistic) so unexplored models get pulled;
    # ties break toward fewer evaluations, then model id.
    def key(m: str):
        mean = stats[m].mean
        return (-(mean if mean is not None else float("inf")), stats[m].doc_evals, m)

    return sorted(models, key=key)[:k]


def choose_dynamic_model(
    stats: dict[str, ModelStats],
    models: list[str],
    params: DynamicParams,
    rng: random.Random,
) -> str:
    """Epsilon-greedy model choice over the candidate list.

    Warm-up first: while any candidate has fewer than `dynamic_first`
    completed evaluations, choose uniformly among the under-sampled ones.
    Afterwards explore uniformly over all candidates with probability
    `dynamic_backoff`, else exploit uniformly over the `dynamic_top` models
    by running mean. Backoff 1.0 is exactly single-stream behavior.
    """
    if params.dynamic_top > len(stats):
        raise ConfigurationError(
            f"dynamic_top ({params.dynamic_top}) exceeds model count ({len(stats)})"
        )
    under = [m for m in models if stats[m].doc_evals < params.dynamic_first]
    if under:
        return rng.choice(under)
    if params.dynamic_backoff > 0 and rng.random() < params.dynamic_backoff:
        return rng.choice(models)
    top = _top_models(stats, models, min(params.dynamic_top, len(models)))
    return rng.choice(top)


def choose_contrastive_window(
    stats: dict[str, ModelStats],
    models: list[str],
    params: DynamicParams,
    width: int,
    rng: random.Random,
) -> list[str]:
    """Pick `width` models with mutually closest running means.

    Models are sorted by mean; the contiguous window minimizing (max - min)
    wins, keeping the comparison budget on systems that are hard to tell
    apart. During warm-up the least-evaluated models are chosen instead, and
    the backoff probability draws a uniformly random window.
    """
    if width > len(models):
        raise ConfigurationError(f"contrastive width ({width}) exceeds model count ({len(models)})")
    if width < 2:
        raise ConfigurationError("contrastive width must be at least 2")

    under = [m for m in models if stats[m].doc_evals < params.dynamic_first]
    if under:
        ranked = sorted(models, key=lambda m: (stats[m].doc_evals, rng.random()))
        return ranked[:width]

    def mean_of(m: str) -> float:
        mean = stats[m].mean
        return mean if mean is not None else float("inf")

    ranked = sorted(models, key=lambda m: (-mean_of(m), stats[m].doc_evals, m))
    windows = [ranked[i : i + width] for i in range(len(ranked) - width + 1)]
    if params.dynamic_backoff > 0 and rng.random() < params.dynamic_backoff:
        return list(rng.choice(windows))
    best = min(windows, key=lambda w: mean_of(w[0]) - mean_of(w[-1]))
    return list(best)


class AssignmentEngine:
    """Per-campaign assignment state plus the strategy operations.

    All mutations must be serialized by the caller (single-writer); the
    engine itself holds no locks. Every random decision draws from an
    injected `random.Random`, so identical (state, seed) yields identical
    assignments.
    """

    def __init__(self, definition: CampaignDefinition, annotators: list[str], seed: str):
        self.definition = definition
        self.seed = seed
        self.annotators = list(annotators)
        self.models = list(definition.model_ids)
        # (doc, model, user) -> per-segment scores
        self.completed: dict[tuple[int, str, str], list[float]] = {}
        # (doc, model) -> {user: issued_at seconds}
        self.in_flight: dict[tuple[int, str], dict[str, float]] = {}
        self.model_stats: dict[str, ModelStats] = {m: ModelStats() for m in self.models}
        self.done_by_user: dict[str, int] = {}
        self.tasks: dict[str, list[int]] | None = None
        self.task_cursors: dict[str, int] = {}
        if definition.tasks is not None:
            if len(annotators) != len(definition.tasks):
                raise ConfigurationError(
                    f"{len(annotators)} annotators for {len(definition.tasks)} tasks"
                )
            self.tasks = {u: list(t) for u, t in zip(annotators, definition.tasks)}

    # -- helpers ------------------------------------------------------------

    def _check_user(self, user_id: str) -> None:
        if user_id not in self.annotators:
            raise AuthorizationError(f"unknown annotator {user_id!r}")

    def display_order(self, doc_index: int, subset: list[str] | None = None) -> tuple[str, ...]:
        doc = self.definition.documents[doc_index]
        if subset is None:
            if not self.definition.info.shuffle:
                return doc.model_ids
            return tuple(shuffle_model_order(doc, f"{self.seed}:{doc_index}"))
        order = sorted(subset)
        if self.definition.info.shuffle:
            rng = random.Random(f"{self.seed}:{doc_index}:{','.join(order)}")
            rng.shuffle(order)
        return tuple(order)

    def _users_completed(self, doc_index: int) -> set[str]:
        return {u for (d, _m, u) in self.completed if d == doc_index}

    def _pair_completed(self, doc_index: int, model_id: str) -> bool:
        return any((d, m) == (doc_index, model_id) for (d, m, _u) in self.completed)

    def _live_holds(self, key: tuple[int, str], now: float) -> dict[str, float]:
        holds = self.in_flight.get(key, {})
        return {u: t for u, t in holds.items() if now - t <= IN_FLIGHT_TIMEOUT_S}

    def _user_hold(self, user_id: str) -> tuple[int, tuple[str, ...]] | None:
        """The caller's open hold, if any: pooled requests resume it."""
        docs: dict[int, list[str]] = {}
        for (d, m), holds in self.in_flight.items():
            if user_id in holds:
                docs.setdefault(d, []).append(m)
        for d, models in docs.items():
            if any((d, m, user_id) in self.completed for m in models):
                continue
            full_set = len(models) >= len(self.definition.documents[d].model_ids)
            return d, self.display_order(d, subset=None if full_set else models)
        return None

    def mark_issued(self, user_id: str, doc_index: int, model_ids: list[str], now: float) -> None:
        for m in model_ids:
            self.in_flight.setdefault((doc_index, m), {}).setdefault(user_id, now)

    def release(self, user_id: str, doc_index: int) -> None:
        """Drop the user's holds on a document (dropout or explicit abandon)."""
        for key in [k for k in self.in_flight if k[0] == doc_index]:
            self.in_flight[key].pop(user_id, None)
            if not self.in_flight[key]:
                del self.in_flight[key]

    # -- progress -----------------------------------------------------------

    def user_progress(self, user_id: str) -> tuple[int, int]:
        if self.tasks is not None:
            task = self.tasks.get(user_id, [])
            return self.task_cursors.get(user_id, 0), len(task)
        done = self.done_by_user.get(user_id, 0)
        if self.definition.info.assignment == "dynamic":
            # Item space is (document, model) pairs, handed out `width` at a time.
            width = self.definition.info.dynamic_contrastive_models or 1
            total = -(-len(self.definition.documents) * len(self.models) // width)
        else:
            total = len(self.definition.documents)
        return done, total

    def campaign_progress(self) -> tuple[int, int]:
        """(completed, total) over the campaign's item space."""
        if self.definition.info.assignment == "dynamic":
            total = len(self.definition.documents) * len(self.models)
            done = len({(d, m) for (d, m, _u) in self.completed})
        else:
            total = len(self.definition.documents)
            done = len({d for (d, _m, _u) in self.completed})
        return done, total

    # -- strategies ----------------------------------------------------------

    def task_based_next(self, user_id: str) -> ItemRef | CampaignComplete:
        self._check_user(user_id)
        if self.tasks is None:
            raise UnsupportedModeError("campaign is not task-based")
        task = self.tasks.get(user_id)
        if task is None:
            raise AuthorizationError(f"no task for annotator {user_id!r}")
        cursor = self.task_cursors.get(user_id, 0)
        if cursor >= len(task):
            return CampaignComplete()
        doc = task[cursor]
        return ItemRef(doc, self.display_order(doc), (cursor, len(task)))

    def _pool(self, now: float) -> list[int]:
        out = []
        for d in range(len(self.definition.documents)):
            if self._users_completed(d):
                continue
            models = self.definition.documents[d].model_ids
            if any(self._live_holds((d, m), now) for m in models):
                continue
            out.append(d)
        return out

    def _stalest_held_doc(self, now: float) -> int | None:
        best: tuple[float, int] | None = None
        for (d, _m), holds in self.in_flight.items():
            if self._users_completed(d):
                continue
            for t in holds.values():
                if now - t <= IN_FLIGHT_TIMEOUT_S and (best is None or t < best[0]):
                    best = (t, d)
        return best[1] if best else None

    def single_stream_next(
        self, user_id: str, rng: random.Random, now: float
    ) -> ItemRef | CampaignComplete:
        self._check_user(user_id)
        resumed = self._user_hold(user_id)
        if resumed is not None:
            doc, order = resumed
            return ItemRef(doc, order, self.user_progress(user_id))
        pool = self._pool(now)
        if pool:
            doc = pool[rng.randrange(len(pool))]
        else:
            doc = self._stalest_held_doc(now)
            if doc is None:
                return CampaignComplete()
        order = self.display_order(doc)
        self.mark_issued(user_id, doc, list(order), now)
        return ItemRef(doc, order, self.user_progress(user_id))

    def _dynamic_params(self) -> DynamicParams:
        info = self.definition.info
        assert info.dynamic_top is not None
        return DynamicParams(info.dynamic_top, info.dynamic_first, info.dynamic_backoff)

    def _docs_open_for(self, models: list[str], now: float) -> list[int]:
        out = []
        for d in range(len(self.definition.documents)):
            ok = True
            for m in models:
                if self._pair_completed(d, m) or self._live_holds((d, m), now):
                    ok = False
                    break
            if ok:
                out.append(d)
        return out

    def _stalest_held_pair(self, now: float) -> tuple[int, str] | None:
        best: tuple[float, tuple[int, str]] | None = None
        for key, holds in self.in_flight.items():
            if self._pair_completed(*key):
                continue
            for t in holds.values():
                if now - t <= IN_FLIGHT_TIMEOUT_S and (best is None or t < best[0]):
                    best = (t, key)
        return best[1] if best else None

    def dynamic_next(
        self,
        user_id: str,
        rng: random.Random,
        now: float,
        params: DynamicParams | None = None,
    ) -> ItemRef | CampaignComplete:
        self._check_user(user_id)
        params = params or self._dynamic_params()
        width = self.definition.info.dynamic_contrastive_models
        resumed = self._user_hold(user_id)
        if resumed is not None:
            doc, order = resumed
            return ItemRef(doc, order, self.user_progress(user_id))

        if width is not None:
            selection = self._dynamic_contrastive_pick(params, width, rng, now)
        else:
            candidates = [m for m in self.models if self._docs_open_for([m], now)]
            selection = None
            if candidates:
                model = choose_dynamic_model(self.model_stats, candidates, params, rng)
                docs = self._docs_open_for([model], now)
                selection = (docs[rng.randrange(len(docs))], [model])

        if selection is None:
            pair = self._stalest_held_pair(now)
            if pair is None:
                return CampaignComplete()
            doc, model = pair
            selection = (doc, [model])

        doc, models = selection
        full_set = len(models) >= len(self.definition.documents[doc].model_ids)
        order = self.display_order(doc, subset=None if full_set else models)
        self.mark_issued(user_id, doc, list(order), now)
        return ItemRef(doc, order, self.user_progress(user_id))

    def _dynamic_contrastive_pick(
        self, params: DynamicParams, width: int, rng: random.Random, now: float
    ) -> tuple[int, list[str]] | None:
        window = self.dynamic_contrastive_select(width, rng, params)
        docs = self._docs_open_for(window, now)
        if docs:
            return docs[rng.randrange(len(docs))], window
        # Chosen window exhausted: fall back to any document that still has
        # `width` open models, comparing the closest means among those.
        open_docs = []
        for d in range(len(self.definition.documents)):
            open_models = [
                m for m in self.definition.documents[d].model_ids
                if not self._pair_completed(d, m) and not self._live_holds((d, m), now)
            ]
            if len(open_models) >= width:
                open_docs.append((d, open_models))
        if not open_docs:
            return None
        d, open_models = open_docs[rng.randrange(len(open_docs))]
        no_warmup = DynamicParams(params.dynamic_top, 0, params.dynamic_backoff)
        subset = choose_contrastive_window(self.model_stats, open_models, no_warmup, width, rng)
        return d, subset

    def dynamic_contrastive_select(
        self, width: int, rng: random.Random, params: DynamicParams | None = None
    ) -> list[str]:
        params = params or self._dynamic_params()
        return choose_contrastive_window(self.model_stats, self.models, params, width, rng)

    # -- completion -----------------------------------------------------------

    def check_completion(
        self, user_id: str, doc_index: int, model_ids: list[str], redo: bool
    ) -> list[str]:
        """Raise unless a submission for these models would be accepted.

        Returns the duplicated model ids (non-empty only in re-do mode).
        """
        self._check_user(user_id)
        duplicates = [m for m in model_ids if (doc_index, m, user_id) in self.completed]
        if duplicates and not redo:
            raise ConflictError(
                f"{user_id!r} already submitted document {doc_index} for {sorted(duplicates)}"
            )
        for m in model_ids:
            if m not in self.model_stats:
                raise ConflictError(f"unknown model {m!r}")
        if self.tasks is not None:
            task = self.tasks.get(user_id, [])
            cursor = self.task_cursors.get(user_id, 0)
            if duplicates and redo:
                pass  # re-doing an earlier document does not move the cursor
            elif cursor >= len(task) or task[cursor] != doc_index:
                raise ConflictError(
                    f"document {doc_index} is not the current task item for {user_id!r}"
                )
        return duplicates

    def record_completion(
        self,
        user_id: str,
        doc_index: int,
        scores_by_model: dict[str, list[float]],
        now: float,
        redo: bool = False,
    ) -> None:
        """Apply a submission: move the item to completed and refresh stats.

        Raises ConflictError on a duplicate (document, model, user) unless the
        campaign is in re-do mode, in which case the previous scores are
        replaced in the running stats (the record history is kept upstream).
        """
        duplicates = self.check_completion(user_id, doc_index, list(scores_by_model), redo)

        for model_id, scores in scores_by_model.items():
            stats = self.model_stats[model_id]
            key = (doc_index, model_id, user_id)
            if key in self.completed:  # redo: retract superseded scores
                old = self.completed[key]
                stats.n -= len(old)
                stats.total -= sum(old)
                stats.doc_evals -= 1
            self.completed[key] = list(scores)
            stats.n += len(scores)
            stats.total += sum(scores)
            stats.doc_evals += 1

        if not duplicates:
            self.done_by_user[user_id] = self.done_by_user.get(user_id, 0) + 1
            if self.tasks is not None:
                self.task_cursors[user_id] = self.task_cursors.get(user_id, 0) + 1
        self.release(user_id, doc_index)

    # -- redistribution --------------------------------------------------------

    def check_redistribute(self, from_user: str, to_user: str, doc_indices: list[int]) -> None:
        """Raise unless the documents can move from one task to another."""
        if self.tasks is None:
            raise UnsupportedModeError("redistribution requires task-based assignment")
        for u in (from_user, to_user):
            if u not in self.tasks:
                raise AuthorizationError(f"unknown annotator {u!r}")
        task = self.tasks[from_user]
        cursor = self.task_cursors.get(from_user, 0)
        pending = task[cursor:]
        for d in doc_indices:
            if d not in task:
                raise ConflictError(f"document {d} is not in {from_user!r}'s task")
            if d not in pending:
                raise ConflictError(f"document {d} was already completed by {from_user!r}")

    def redistribute(self, from_user: str, to_user: str, doc_indices: list[int]) -> None:
        """Move uncompleted documents from one task's tail to another's."""
        self.check_redistribute(from_user, to_user, doc_indices)
        assert self.tasks is not None
        self.tasks[from_user] = [d for d in self.tasks[from_user] if d not in doc_indices]
        self.tasks[to_user] = self.tasks[to_user] + list(doc_indices)
