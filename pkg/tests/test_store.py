from __future__ import annotations

import json
import logging
import random

import pytest

from humeval.errors import AuthorizationError, ConflictError, LogCorruptionError, StateError
from humeval.store import EventLog, Store, StoredEvent, decode_records, encode_record

from .conftest import FakeClock, as_bytes, pooled_campaign, task_campaign

T0 = 1_700_000_000.0


def submit_payload(next_payload: dict, scores_by_alias: dict[str, float] | float,
                   spans=None, skip_tutorial: bool = False, events=None) -> dict:
    outputs = {}
    for alias in next_payload["aliases"]:
        score = scores_by_alias if isinstance(scores_by_alias, (int, float)) \
            else scores_by_alias[alias]
        outputs[alias] = {
            "segments": [
                {"score": score, "spans": list(spans or [])}
                for _ in next_payload["segments"]
            ]
        }
    payload = {
        "document_index": next_payload["document_index"],
        "outputs": outputs,
        "skip_tutorial": skip_tutorial,
    }
    if events is not None:
        payload["events"] = events
    return payload


def drive_to_completion(store: Store, tokens: list[str], rng: random.Random,
                        clock: FakeClock) -> None:
    """Scripted annotators drain a pooled campaign."""
    active = list(tokens)
    while active:
        token = rng.choice(active)
        item = store.next_item(token)
        if item["complete"]:
            active.remove(token)
            continue
        clock.advance(rng.uniform(1, 5))
        store.submit(token, submit_payload(item, rng.randint(20, 95)))
        clock.advance(rng.uniform(1, 5))


def fresh_store(tmp_path, name, clock=None, rng_seed=0) -> Store:
    return Store(tmp_path / name, clock=clock or FakeClock(), rng_seed=rng_seed)


# -- log framing -----------------------------------------------------------------


def test_sequences_are_consecutive():
    events = [StoredEvent(i, "c", 1000 + i, "results_revealed", {"user": "m"})
              for i in (1, 2, 3)]
    data = b"".join(encode_record(e) for e in events)
    decoded, torn = decode_records(data)
    assert [e.sequence for e in decoded] == [1, 2, 3]
    assert not torn


def test_sequence_gap_is_corruption():
    events = [StoredEvent(1, "c", 1, "results_revealed", {}),
              StoredEvent(3, "c", 2, "results_revealed", {})]
    data = b"".join(encode_record(e) for e in events)
    with pytest.raises(LogCorruptionError):
        decode_records(data)


def test_torn_tail_is_tolerated():
    events = [StoredEvent(i, "c", i, "results_revealed", {}) for i in (1, 2)]
    data = b"".join(encode_record(e) for e in events)
    for cut in range(len(data) - len(encode_record(events[1])) + 1, len(data)):
        decoded, torn = decode_records(data[:cut])
        assert [e.sequence for e in decoded] == [1]
        assert torn


def test_corrupted_middle_record_refuses():
    events = [StoredEvent(i, "c", i, "results_revealed", {}) for i in (1, 2, 3)]
    records = [bytearray(encode_record(e)) for e in events]
    records[1][12] ^= 0xFF  # flip a byte inside the second body
    with pytest.raises(LogCorruptionError) as exc:
        decode_records(b"".join(bytes(r) for r in records))
    assert exc.value.sequence == 2


# -- store basics -------------------------------------------------------------------


def test_empty_data_dir_loads_empty_state(tmp_path):
    store = fresh_store(tmp_path, "d")
    store.load()
    assert store.campaigns == {}
    assert store.list_campaigns() == []
    store.close()


def test_add_campaign_appends_two_events(tmp_path):
    store = fresh_store(tmp_path, "d")
    store.add_campaign(as_bytes(pooled_campaign(campaign_id="one", users=2)))
    events, torn = EventLog.read(tmp_path / "d" / "one.log")
    assert not torn
    assert [e.kind for e in events] == ["campaign_added", "links_generated"]
    assert [e.sequence for e in events] == [1, 2]
    store.close()


def test_log_with_only_campaign_added_replays(tmp_path):
    store = fresh_store(tmp_path, "a")
    store.add_campaign(as_bytes(pooled_campaign(campaign_id="solo", users=2)))
    events, _ = EventLog.read(tmp_path / "a" / "solo.log")
    store.close()

    other_dir = tmp_path / "b"
    other_dir.mkdir()
    (other_dir / "solo.log").write_bytes(encode_record(events[0]))
    other = Store(other_dir)
    other.load()
    assert set(other.campaigns) == {"solo"}
    assert other.campaigns["solo"].records == []
    other.close()


def test_duplicate_campaign_id_rejected(tmp_path):
    store = fresh_store(tmp_path, "d")
    raw = as_bytes(pooled_campaign(campaign_id="dup", users=1))
    store.add_campaign(raw)
    with pytest.raises(ConflictError):
        store.add_campaign(raw)
    store.close()


def test_disk_failure_leaves_memory_untouched(tmp_path, monkeypatch):
    store = fresh_store(tmp_path, "d")

    def boom(self, event):
        raise OSError("disk full")

    monkeypatch.setattr(EventLog, "append", boom)
    with pytest.raises(OSError):
        store.add_campaign(as_bytes(pooled_campaign(campaign_id="x", users=1)))
    assert store.campaigns == {}
    store.close()


def test_log_file_locked_against_second_writer(tmp_path):
    store = fresh_store(tmp_path, "d")
    store.add_campaign(as_bytes(pooled_campaign(campaign_id="locked", users=1)))
    with pytest.raises(StateError):
        EventLog(tmp_path / "d" / "locked.log")
    store.close()


# -- replay equivalence ---------------------------------------------------------------


def workload_store(tmp_path, name="d") -> tuple[Store, FakeClock]:
    clock = FakeClock()
    store = Store(tmp_path / name, clock=clock, rng_seed=7)
    campaign = pooled_campaign(campaign_id="work", users=3, n_docs=6,
                               models=("m1", "m2"), n_segments=2)
    campaign["data"][0][0]["validation"] = {
        "m1": [{"score": [0, 100]}]  # silent check, always passes
    }
    annotators, _manager = store.add_campaign(as_bytes(campaign))
    tokens = [ident.token for ident, _ in annotators]
    drive_to_completion(store, tokens, random.Random(5), clock)
    return store, clock


def test_live_state_equals_replayed_state_byte_for_byte(tmp_path):
    store, _clock = workload_store(tmp_path)
    live = store.export_bytes("work")
    store.close()

    replayed = Store(tmp_path / "d")
    replayed.load()
    assert replayed.export_bytes("work") == live
    replayed.close()


def test_replayed_engine_matches_live_engine(tmp_path):
    store, _clock = workload_store(tmp_path)
    live_engine = store.campaigns["work"].engine
    store.close()
    replayed = Store(tmp_path / "d")
    replayed.load()
    engine = replayed.campaigns["work"].engine
    assert engine.completed == live_engine.completed
    assert engine.done_by_user == live_engine.done_by_user
    assert {m: (s.n, s.total, s.doc_evals) for m, s in engine.model_stats.items()} == \
        {m: (s.n, s.total, s.doc_evals) for m, s in live_engine.model_stats.items()}
    assert engine.in_flight == live_engine.in_flight
    replayed.close()


def test_crash_at_every_call_boundary_restores_a_prefix(tmp_path):
    clock = FakeClock()
    store = Store(tmp_path / "d", clock=clock, rng_seed=11)
    annotators, _ = store.add_campaign(as_bytes(
        pooled_campaign(campaign_id="crash", users=2, n_docs=4, models=("m",))
    ))
    tokens = [ident.token for ident, _ in annotators]
    log_path = tmp_path / "d" / "crash.log"

    checkpoints = [(log_path.stat().st_size, store.export_bytes("crash"))]
    rng = random.Random(3)
    active = list(tokens)
    while active:
        token = rng.choice(active)
        item = store.next_item(token)
        if item["complete"]:
            active.remove(token)
        else:
            clock.advance(1)
            store.submit(token, submit_payload(item, rng.randint(10, 90)))
        checkpoints.append((log_path.stat().st_size, store.export_bytes("crash")))
    store.close()

    data = log_path.read_bytes()
    for i, (size, expected) in enumerate(checkpoints):
        crash_dir = tmp_path / f"crash-{i}"
        crash_dir.mkdir()
        (crash_dir / "crash.log").write_bytes(data[:size])
        recovered = Store(crash_dir)
        recovered.load()
        assert recovered.export_bytes("crash") == expected
        recovered.close()


def test_mid_record_crash_discards_torn_tail(tmp_path, caplog):
    store, _clock = workload_store(tmp_path)
    store.close()
    log_path = tmp_path / "d" / "work.log"
    data = log_path.read_bytes()

    events, _ = decode_records(data)
    boundary = len(data) - len(encode_record(events[-1]))
    cut_dir = tmp_path / "cut"
    cut_dir.mkdir()
    (cut_dir / "work.log").write_bytes(data[: boundary + 5])  # half a header + body

    with caplog.at_level(logging.WARNING):
        recovered = Store(cut_dir)
        recovered.load()
    assert any("torn" in message for message in caplog.messages)

    clean_dir = tmp_path / "clean"
    clean_dir.mkdir()
    (clean_dir / "work.log").write_bytes(data[:boundary])
    clean = Store(clean_dir)
    clean.load()
    assert recovered.export_bytes("work") == clean.export_bytes("work")
    recovered.close()
    clean.close()


def test_campaigns_replay_independently(tmp_path):
    clock = FakeClock()
    store = Store(tmp_path / "d", clock=clock, rng_seed=2)
    token_sets = {}
    for name in ("alpha", "beta", "gamma"):
        annotators, _ = store.add_campaign(as_bytes(
            pooled_campaign(campaign_id=name, users=2, n_docs=3, models=("m",))
        ))
        token_sets[name] = [ident.token for ident, _ in annotators]
    rng = random.Random(8)
    for _round in range(3):
        for name in ("alpha", "beta", "gamma"):
            token = rng.choice(token_sets[name])
            item = store.next_item(token)
            if not item["complete"]:
                clock.advance(1)
                store.submit(token, submit_payload(item, rng.randint(10, 90)))
    exports = {name: store.export_bytes(name) for name in token_sets}
    store.close()

    for name in token_sets:
        solo_dir = tmp_path / f"solo-{name}"
        solo_dir.mkdir()
        (solo_dir / f"{name}.log").write_bytes((tmp_path / "d" / f"{name}.log").read_bytes())
        solo = Store(solo_dir)
        solo.load()
        assert solo.export_bytes(name) == exports[name]
        solo.close()


# -- submissions, quality gates, re-do -------------------------------------------------


def test_blocked_submission_persists_no_record(tmp_path):
    clock = FakeClock()
    store = Store(tmp_path / "d", clock=clock)
    campaign = pooled_campaign(campaign_id="tut", users=1, n_docs=1, models=("m1",))
    campaign["data"][0][0]["validation"] = {
        "m1": [{"warning": "Please set score between 70-80.", "score": [70, 80]}]
    }
    annotators, _ = store.add_campaign(as_bytes(campaign))
    token = annotators[0][0].token

    item = store.next_item(token)
    blocked = store.submit(token, submit_payload(item, 50))
    assert blocked["status"] == "blocked"
    assert blocked["warnings"] == ["Please set score between 70-80."]
    assert store.campaigns["tut"].records == []
    assert store.campaigns["tut"].ledger.for_user(annotators[0][0].user_id).tutorial_attempts == 1

    accepted = store.submit(token, submit_payload(item, 75))
    assert accepted["status"] == "accepted"
    assert len(store.campaigns["tut"].records) == 1
    store.close()


def test_silent_check_invisible_to_annotator(tmp_path):
    store = Store(tmp_path / "d", clock=FakeClock())
    campaign = pooled_campaign(campaign_id="silent", users=1, n_docs=1, models=("m1",))
    campaign["data"][0][0]["validation"] = {"m1": [{"score": [70, 80]}]}  # no warning
    annotators, _ = store.add_campaign(as_bytes(campaign))
    token, user_id = annotators[0][0].token, annotators[0][0].user_id

    item = store.next_item(token)
    result = store.submit(token, submit_payload(item, 10))  # fails the silent check
    assert result["status"] == "accepted"
    assert "warnings" not in result
    quality = store.campaigns["silent"].ledger.for_user(user_id)
    assert (quality.checks_seen, quality.checks_passed) == (1, 0)
    store.close()


def test_skip_tutorial_records_event_and_passes(tmp_path):
    store = Store(tmp_path / "d", clock=FakeClock())
    campaign = pooled_campaign(campaign_id="skip", users=1, n_docs=1, models=("m1",))
    campaign["data"][0][0]["validation"] = {
        "m1": [{"warning": "w", "score": [70, 80], "allow_skip": True}]
    }
    annotators, _ = store.add_campaign(as_bytes(campaign))
    token = annotators[0][0].token
    item = store.next_item(token)
    result = store.submit(token, submit_payload(item, 10, skip_tutorial=True))
    assert result["status"] == "accepted"
    events, _ = EventLog.read(store._logs["skip"].path)
    assert any(e.kind == "tutorial_skip" for e in events)
    store.close()


def test_duplicate_submit_conflicts(tmp_path):
    store = Store(tmp_path / "d", clock=FakeClock())
    annotators, _ = store.add_campaign(as_bytes(
        pooled_campaign(campaign_id="dup", users=1, n_docs=2, models=("m",))
    ))
    token = annotators[0][0].token
    item = store.next_item(token)
    store.submit(token, submit_payload(item, 50))
    with pytest.raises(ConflictError):
        store.submit(token, submit_payload(item, 60))
    store.close()


def test_redo_supersedes_without_deleting(tmp_path):
    store = Store(tmp_path / "d", clock=FakeClock())
    annotators, _ = store.add_campaign(as_bytes(
        pooled_campaign(campaign_id="redo", users=1, n_docs=1, models=("m",),
                        allow_redo=True)
    ))
    token = annotators[0][0].token
    item = store.next_item(token)
    store.submit(token, submit_payload(item, 40))
    store.submit(token, submit_payload(item, 90))

    export = store.export_annotations("redo")
    assert len(export["records"]) == 2
    first, second = export["records"]
    assert first["superseded_by"] == second["sequence"]
    assert second["superseded_by"] is None
    assert [seg["score"] for seg in second["segments"]] == [90.0]
    assert store.campaigns["redo"].engine.model_stats["m"].mean == pytest.approx(90.0)
    store.close()


def test_export_record_round_trip_with_spans(tmp_path):
    store = Store(tmp_path / "d", clock=FakeClock())
    annotators, _ = store.add_campaign(as_bytes(
        pooled_campaign(campaign_id="spans", users=1, n_docs=1, models=("m",))
    ))
    token = annotators[0][0].token
    item = store.next_item(token)
    spans = [
        {"start_i": 1, "end_i": 5, "severity": "minor", "origin": "human"},
        {"start_i": 8, "end_i": 12, "severity": "major", "origin": "human"},
    ]
    store.submit(token, submit_payload(item, 64, spans=spans))

    export = json.loads(store.export_bytes("spans"))
    record = export["records"][0]
    assert record["segments"][0]["spans"] == spans
    from humeval.records import AnnotationRecord
    assert AnnotationRecord.from_dict(record).to_dict() == record
    store.close()


def test_export_unknown_campaign_not_found(tmp_path):
    store = fresh_store(tmp_path, "d")
    from humeval.errors import NotFoundError
    with pytest.raises(NotFoundError):
        store.export_annotations("ghost")
    store.close()


def test_export_empty_campaign_valid_schema(tmp_path):
    store = fresh_store(tmp_path, "d")
    store.add_campaign(as_bytes(pooled_campaign(campaign_id="empty", users=2)))
    export = store.export_annotations("empty")
    assert export["records"] == []
    assert export["campaign_id"] == "empty"
    assert len(export["users"]) == 3  # 2 annotators + manager
    store.close()


def test_redistribute_survives_replay(tmp_path):
    clock = FakeClock()
    store = Store(tmp_path / "d", clock=clock, rng_seed=4)
    annotators, manager = store.add_campaign(as_bytes(
        task_campaign(campaign_id="redis", tasks=2, docs_per_task=3, models=("m",))
    ))
    (a1, _), (a2, _) = annotators
    item = store.next_item(a1.token)
    store.submit(a1.token, submit_payload(item, 50))
    store.redistribute(manager[0].token, a1.user_id, a2.user_id, [1, 2])
    live_tasks = dict(store.campaigns["redis"].engine.tasks)
    live_cursors = dict(store.campaigns["redis"].engine.task_cursors)
    assert store.next_item(a1.token)["complete"]
    store.close()

    replayed = Store(tmp_path / "d")
    replayed.load()
    engine = replayed.campaigns["redis"].engine
    assert engine.tasks == live_tasks
    assert engine.task_cursors == live_cursors
    replayed.close()


def test_unknown_token_is_authorization_error(tmp_path):
    store = fresh_store(tmp_path, "d")
    store.add_campaign(as_bytes(pooled_campaign(campaign_id="auth", users=1)))
    with pytest.raises(AuthorizationError):
        store.next_item("not-a-token-at-all")
    store.close()


def test_crash_between_flush_and_apply_recovers_the_event(tmp_path, monkeypatch):
    """The log write precedes the in-memory apply; if the process dies in
    between, the acknowledged-on-disk event must surface after replay."""
    store = Store(tmp_path / "d", clock=FakeClock())
    annotators, _ = store.add_campaign(as_bytes(
        pooled_campaign(campaign_id="gap", users=1, n_docs=2, models=("m",))
    ))
    token = annotators[0][0].token
    item = store.next_item(token)

    original_apply = Store._apply
    state = {"armed": False}

    def crashing_apply(self, event):
        if state["armed"] and event.kind == "annotation_submitted":
            raise KeyboardInterrupt("simulated crash after flush")
        return original_apply(self, event)

    monkeypatch.setattr(Store, "_apply", crashing_apply)
    state["armed"] = True
    with pytest.raises(KeyboardInterrupt):
        store.submit(token, submit_payload(item, 64))
    # In-memory state never saw the submission...
    assert store.campaigns["gap"].records == []
    store.close()

    # ...but the flushed event survives the restart.
    monkeypatch.setattr(Store, "_apply", original_apply)
    recovered = Store(tmp_path / "d")
    recovered.load()
    records = recovered.campaigns["gap"].records
    assert len(records) == 1
    assert records[0].segments[0].score == 64.0
    recovered.close()


def test_campaign_attention_threshold_reaches_the_ledger(tmp_path):
    store = Store(tmp_path / "d", clock=FakeClock())
    campaign = pooled_campaign(campaign_id="thresh", users=1, n_docs=5, models=("m",),
                               attention_threshold=0.5)
    for doc in campaign["data"]:
        doc[0]["validation"] = {"m": [{"score": [90, 100]}]}  # silent, hard to pass
    annotators, _ = store.add_campaign(as_bytes(campaign))
    token, user_id = annotators[0][0].token, annotators[0][0].user_id
    assert store.campaigns["thresh"].ledger.threshold == 0.5

    scores = iter([95, 95, 95, 10, 10])  # 3/5 = 0.6 >= 0.5 -> accept
    for _ in range(5):
        item = store.next_item(token)
        store.submit(token, submit_payload(item, next(scores)))
    done = store.next_item(token)
    assert done["complete"] and done["verdict"] == "accept"
    store.close()
