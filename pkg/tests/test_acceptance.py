"""Acceptance suite: one test per release criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v` to see the per-criterion lines.
Criteria 12-13 concern the browser frontend and live in frontend/test/.
"""

from __future__ import annotations

import json
import math
import random
import signal
import socket
import statistics
import subprocess
import sys
import threading
import time
import urllib.request
from collections import Counter
from pathlib import Path

import pytest

from humeval.analytics import CapacityQuery, build_ranking, mm1_capacity
from humeval.assignment import AssignmentEngine, DynamicParams, ModelStats, choose_dynamic_model
from humeval.campaign import ErrorSpan, ExpectedSpan, ValidationRule, parse_campaign
from humeval.quality import evaluate_rule
from humeval.records import AnnotationRecord, SegmentAnnotation
from humeval.stats import kendall_tau_b, paired_t_test, pearson
from humeval.store import EventLog, Store, decode_records, encode_record

from .conftest import FakeClock, as_bytes, dynamic_campaign, pooled_campaign
from .test_store import submit_payload

SAMPLES = Path(__file__).parent.parent / "sample_campaigns"


def note(text: str) -> None:
    print(f"\n[acceptance] {text}")


# -- criterion 1: capacity math ------------------------------------------------------


def test_c01_capacity_math():
    query = CapacityQuery(0.050, 130.0, 1.0, 0.99)
    mm1_capacity(query)  # warm-up
    start = time.perf_counter()
    result = mm1_capacity(query)
    elapsed = time.perf_counter() - start

    assert result.mu == 20.0
    assert result.lambda_max == pytest.approx(15.39, abs=0.01)
    assert result.max_users == 2001
    assert result.naive_throughput == 2600
    assert elapsed < 0.001
    note(f"criterion 1 PASS: mu=20, lambda=15.39, N=2001, naive=2600 in {elapsed * 1e6:.0f} us")


# -- criteria 2-4: bandit behavior ---------------------------------------------------


def _warm_engine(n_docs: int, backoff: float) -> AssignmentEngine:
    campaign = dynamic_campaign(campaign_id="band", n_docs=n_docs, dynamic_top=2,
                                dynamic_first=5, dynamic_backoff=backoff)
    engine = AssignmentEngine(parse_campaign(as_bytes(campaign)), ["u1"], "seed")
    engine.model_stats = {
        m: ModelStats(n=5, total=mean * 5, doc_evals=5)
        for m, mean in {"A": 90.0, "B": 49.0, "C": 50.0}.items()
    }
    return engine


def test_c02_bandit_worked_example():
    start = time.perf_counter()
    engine = _warm_engine(n_docs=20, backoff=0.0)
    rng = random.Random(7)
    chosen = Counter()
    for _ in range(1000):
        item = engine.dynamic_next("u1", rng, 0.0)
        chosen[item.model_ids[0]] += 1
        engine.release("u1", item.document_index)
    elapsed = time.perf_counter() - start

    assert set(chosen) == {"A", "C"}, f"selected {dict(chosen)}"
    assert chosen["B"] == 0
    assert elapsed < 1.0
    note(f"criterion 2 PASS: 1000 draws hit only A/C ({dict(chosen)}) in {elapsed:.2f}s")


def test_c03_bandit_backoff_frequency():
    start = time.perf_counter()
    engine = _warm_engine(n_docs=6, backoff=0.25)
    rng = random.Random(31337)
    counts = Counter()
    n = 100_000
    for _ in range(n):
        item = engine.dynamic_next("u1", rng, 0.0)
        counts[item.model_ids[0]] += 1
        engine.release("u1", item.document_index)
    elapsed = time.perf_counter() - start

    p_b = counts["B"] / n
    assert p_b == pytest.approx(0.25 / 3, abs=0.003), f"P(B)={p_b:.4f}"
    for m in ("A", "C"):
        assert counts[m] / n == pytest.approx(0.75 / 2 + 0.25 / 3, abs=0.005)
    assert elapsed < 10.0
    note(f"criterion 3 PASS: P(B)={p_b:.4f} (target 0.0833+-0.003) in {elapsed:.1f}s")


TRUE_MEANS = {"A": 95.0, "B": 69.0, "C": 33.0}


def _identification_steps(strategy: str, rng: random.Random, horizon: int = 250) -> int:
    """Annotations until the true best leads the ranking with at least 25
    evaluations on it and on its closest competitor (evidence-based stop)."""
    models = list(TRUE_MEANS)
    stats = {m: ModelStats() for m in models}
    params = DynamicParams(dynamic_top=2, dynamic_first=5, dynamic_backoff=0.25)
    for step in range(1, horizon + 1):
        if strategy == "dynamic":
            model = choose_dynamic_model(stats, models, params, rng)
        else:
            model = rng.choice(models)
        score = min(100.0, max(0.0, rng.gauss(TRUE_MEANS[model], 10.0)))
        entry = stats[model]
        entry.n += 1
        entry.total += score
        entry.doc_evals += 1
        if all(stats[m].n >= 2 for m in models):
            ranked = sorted(models, key=lambda m: -stats[m].mean)
            top, runner = ranked[0], ranked[1]
            if top == "A" and min(stats[top].n, stats[runner].n) >= 25:
                return step
    return horizon + 1


def test_c04_bandit_efficiency():
    start = time.perf_counter()
    runs = 200
    wins = 0
    dyn_counts, uni_counts = [], []
    for i in range(runs):
        dyn = _identification_steps("dynamic", random.Random(i))
        uni = _identification_steps("uniform", random.Random(100_000 + i))
        dyn_counts.append(dyn)
        uni_counts.append(uni)
        wins += dyn <= uni
    elapsed = time.perf_counter() - start

    assert wins >= 0.80 * runs, f"dynamic won or tied only {wins}/{runs}"
    assert elapsed < 60.0
    note(
        f"criterion 4 PASS: dynamic <= uniform in {wins}/{runs} runs "
        f"(median {statistics.median(dyn_counts):.0f} vs {statistics.median(uni_counts):.0f} "
        f"annotations) in {elapsed:.1f}s"
    )


# -- criterion 5: statistics oracles ---------------------------------------------------


def test_c05_statistics_oracles():
    from scipy import stats as scipy_stats

    from .test_stats import brute_force_tau_b

    start = time.perf_counter()
    rng = random.Random(20_240)
    checked = {"t": 0, "r": 0, "tau": 0}
    for _ in range(1000):
        n = rng.randint(3, 30)
        xs = [rng.randint(0, 12) for _ in range(n)]  # narrow range: plenty of ties
        ys = [rng.randint(0, 12) for _ in range(n)]

        if len(set(x - y for x, y in zip(xs, ys))) > 1:
            t, p = paired_t_test(xs, ys)
            ref_t, ref_p = scipy_stats.ttest_rel(xs, ys)
            assert t == pytest.approx(float(ref_t), abs=1e-9)
            assert p == pytest.approx(float(ref_p), abs=1e-9)
            checked["t"] += 1

        if len(set(xs)) > 1 and len(set(ys)) > 1:
            assert pearson(xs, ys) == pytest.approx(
                float(scipy_stats.pearsonr(xs, ys).statistic), abs=1e-9)
            checked["r"] += 1

            ours = kendall_tau_b(xs, ys)
            assert ours == pytest.approx(brute_force_tau_b(xs, ys), abs=1e-12)
            assert ours == pytest.approx(
                float(scipy_stats.kendalltau(xs, ys).statistic), abs=1e-9)
            checked["tau"] += 1

    rng_same = random.Random(9)
    same = [rng_same.randint(0, 100) for _ in range(10)]
    assert paired_t_test(same, same) == (0.0, 1.0)
    assert pearson(same, same) == pytest.approx(1.0)
    assert kendall_tau_b(same, same) == pytest.approx(1.0)
    elapsed = time.perf_counter() - start

    assert elapsed < 30.0
    note(f"criterion 5 PASS: {checked} comparisons within 1e-9 in {elapsed:.1f}s")


# -- criterion 6: significance clustering ----------------------------------------------


def test_c06_significance_clustering():
    start = time.perf_counter()
    rng = random.Random(1234)
    records = []
    for doc in range(30):
        for model, mean in (("A", 95), ("B", 69), ("C", 33)):
            score = min(100.0, max(0.0, rng.gauss(mean, 5)))
            records.append(AnnotationRecord(
                user_id="u1", document_index=doc, model_id=model,
                segments=(SegmentAnnotation(score=score),),
            ))
    report = build_ranking(records, alpha=0.05)
    elapsed = time.perf_counter() - start

    assert [row.model_id for row in report.rows] == ["A", "B", "C"]
    assert report.separations == frozenset({0, 1})
    assert report.pairwise_p[0][1] < 0.05
    assert report.pairwise_p[1][2] < 0.05
    assert elapsed < 5.0
    note(f"criterion 6 PASS: rows A,B,C with both separations (p<0.05) in {elapsed:.2f}s")


# -- criterion 7: validation semantics ---------------------------------------------------


def test_c07_validation_semantics():
    start = time.perf_counter()
    tutorial = ValidationRule(
        warning="Please set score between 70-80.",
        score_range=(70, 80),
        expected_spans=(ExpectedSpan((0, 2), (4, 8), "minor"),),
        allow_skip=True,
    )
    good = evaluate_rule(tutorial, 75, [ErrorSpan(1, 5, "minor")])
    assert good.passed

    bad = evaluate_rule(tutorial, 50, [ErrorSpan(1, 5, "minor")])
    assert not bad.passed
    assert bad.blocking
    assert bad.warning == "Please set score between 70-80."

    contrastive = ValidationRule(
        warning="B must score higher than A.",
        score_range=(70, 90),
        score_greaterthan="A",
    )
    assert evaluate_rule(contrastive, 80, [], {"A": 30}).passed
    blocked = evaluate_rule(contrastive, 80, [], {"A": 85})
    assert not blocked.passed
    assert blocked.warning == "B must score higher than A."
    elapsed = time.perf_counter() - start

    assert elapsed < 1.0
    note(f"criterion 7 PASS: tutorial and contrastive rules behave as documented in {elapsed:.3f}s")


# -- criterion 8: crash-replay --------------------------------------------------------


def test_c08_crash_replay(tmp_path, caplog):
    import logging

    start = time.perf_counter()
    clock = FakeClock()
    store = Store(tmp_path / "live", clock=clock, rng_seed=99)
    campaign = pooled_campaign(campaign_id="crashy", users=5, n_docs=350, models=("m",))
    for doc in campaign["data"]:
        doc[0]["validation"] = {"m": [{"score": [0, 100]}]}  # silent check per doc
    annotators, _ = store.add_campaign(as_bytes(campaign))
    tokens = [ident.token for ident, _ in annotators]
    log_path = tmp_path / "live" / "crashy.log"

    rng = random.Random(17)
    checkpoints = {log_path.stat().st_size: store.export_bytes("crashy")}
    active = list(tokens)
    while active:
        token = rng.choice(active)
        item = store.next_item(token)
        if item["complete"]:
            active.remove(token)
        else:
            clock.advance(1)
            store.submit(token, submit_payload(item, rng.randint(5, 95)))
        checkpoints[log_path.stat().st_size] = store.export_bytes("crashy")
    final_export = store.export_bytes("crashy")
    store.close()

    data = log_path.read_bytes()
    events, torn = decode_records(data)
    assert not torn
    assert len(events) >= 1000, f"workload produced only {len(events)} events"

    # Kill at every record boundary: replay must succeed, and at call
    # boundaries it must match the live export byte for byte.
    crash_dir = tmp_path / "crash"
    crash_dir.mkdir()
    boundary = 0
    compared = 0
    for event in events:
        boundary += len(encode_record(event))
        (crash_dir / "crashy.log").write_bytes(data[:boundary])
        recovered = Store(crash_dir)
        recovered.load()
        if boundary in checkpoints:
            assert recovered.export_bytes("crashy") == checkpoints[boundary]
            compared += 1
        recovered.close()
    assert boundary == len(data)
    assert recovered is not None

    replayed = Store(tmp_path / "live")
    replayed.load()
    assert replayed.export_bytes("crashy") == final_export
    replayed.close()

    # Torn trailing record: discarded with a warning, state equals a clean
    # truncation at the last complete record boundary.
    torn_dir = tmp_path / "torn"
    torn_dir.mkdir()
    last_len = len(encode_record(events[-1]))
    prev_boundary = len(data) - last_len
    (torn_dir / "crashy.log").write_bytes(data[: prev_boundary + 7])
    with caplog.at_level(logging.WARNING):
        torn_store = Store(torn_dir)
        torn_store.load()
    assert any("torn" in message for message in caplog.messages)
    clean_dir = tmp_path / "clean"
    clean_dir.mkdir()
    (clean_dir / "crashy.log").write_bytes(data[:prev_boundary])
    clean_store = Store(clean_dir)
    clean_store.load()
    assert torn_store.export_bytes("crashy") == clean_store.export_bytes("crashy")
    torn_store.close()
    clean_store.close()
    elapsed = time.perf_counter() - start

    assert elapsed < 60.0
    note(
        f"criterion 8 PASS: {len(events)} events, {len(events)} kill points, "
        f"{compared} byte-compared checkpoints, torn tail discarded, in {elapsed:.1f}s"
    )


# -- criteria 9-10: end-to-end over HTTP ----------------------------------------------


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _wait_for(url: str, timeout: float = 20.0) -> None:
    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            with urllib.request.urlopen(url, timeout=1):
                return
        except OSError:
            time.sleep(0.1)
    raise TimeoutError(f"server at {url} did not come up")


def _get(url: str) -> dict:
    with urllib.request.urlopen(url, timeout=10) as response:
        return json.loads(response.read())


def _post(url: str, payload: dict | None = None) -> dict:
    body = json.dumps(payload or {}).encode()
    request = urllib.request.Request(url, data=body,
                                     headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(request, timeout=10) as response:
        return json.loads(response.read())


def test_c09_end_to_end_golden_run(tmp_path):
    start = time.perf_counter()
    data_dir = str(tmp_path / "data")
    port = _free_port()
    added = subprocess.run(
        [sys.executable, "-m", "humeval.cli", "add",
         str(SAMPLES / "single_stream_esa.json"),
         "--data-dir", data_dir, "--port", str(port)],
        capture_output=True, text=True,
    )
    assert added.returncode == 0, added.stderr
    lines = added.stdout.strip().splitlines()
    assert len(lines) == 11
    annotator_tokens = [line.rsplit("token=", 1)[1] for line in lines[:10]]
    manager_token = lines[-1].rsplit("token=", 1)[1]
    note(f"criterion 9: add printed {len(lines)} links (10 annotators + dashboard)")

    server = subprocess.Popen(
        [sys.executable, "-m", "humeval.cli", "run",
         "--data-dir", data_dir, "--port", str(port)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        _wait_for(f"{base}/healthz")
        scripted = annotator_tokens[:3]
        verdicts = []
        for token in scripted * 10:  # round-robin until everyone is done
            item = _get(f"{base}/api/next?token={token}")
            if item["complete"]:
                if item["token"] not in verdicts:
                    verdicts.append(item["token"])
                continue
            score = 40 + 5 * (item["document_index"] % 10)
            outputs = {
                alias: {"segments": [{"score": score, "spans": []}
                                     for _ in item["segments"]]}
                for alias in item["aliases"]
            }
            result = _post(f"{base}/api/submit?token={token}",
                           {"document_index": item["document_index"], "outputs": outputs})
            assert result["status"] == "accepted"
        assert all(_get(f"{base}/api/next?token={t}")["complete"] for t in scripted)

        ranking = _post(f"{base}/api/results?token={manager_token}")
        assert [row["model"] for row in ranking["rows"]] == ["modelA"]
        assert ranking["rows"][0]["n"] == 12  # 6 documents x 2 segments

        export_1 = urllib.request.urlopen(
            f"{base}/api/export?token={manager_token}", timeout=10).read()
        export_2 = urllib.request.urlopen(
            f"{base}/api/export?token={manager_token}", timeout=10).read()
        assert export_1 == export_2
    finally:
        server.send_signal(signal.SIGINT)
        server.wait(timeout=10)

    events, _ = EventLog.read(Path(data_dir) / "demo_single_stream.log")
    kinds = [e.kind for e in events]
    assert kinds.count("results_revealed") == 1
    assert kinds.count("annotation_submitted") == 6
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    note(f"criterion 9 PASS: golden run complete (reveal logged, export byte-stable) in {elapsed:.1f}s")


def test_c10_load_sla(tmp_path):
    start = time.perf_counter()
    data_dir = str(tmp_path / "data")
    port = _free_port()
    campaign = pooled_campaign(campaign_id="load", users=100, n_docs=250, models=("m",))
    campaign_path = tmp_path / "load.json"
    campaign_path.write_text(json.dumps(campaign))
    added = subprocess.run(
        [sys.executable, "-m", "humeval.cli", "add", str(campaign_path),
         "--data-dir", data_dir, "--port", str(port)],
        capture_output=True, text=True,
    )
    assert added.returncode == 0, added.stderr
    tokens = [line.rsplit("token=", 1)[1]
              for line in added.stdout.strip().splitlines()[:-1]]
    assert len(tokens) == 100

    server = subprocess.Popen(
        [sys.executable, "-m", "humeval.cli", "run",
         "--data-dir", data_dir, "--port", str(port)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    think_time = 130.0
    latencies: list[float] = []
    errors: list[str] = []
    lock = threading.Lock()

    def annotator(token: str, offset: float) -> None:
        time.sleep(offset)
        for _wave in range(2):  # two requests per user, one think time apart
            t0 = time.perf_counter()
            try:
                with urllib.request.urlopen(f"{base}/api/next?token={token}",
                                            timeout=10) as response:
                    response.read()
                elapsed = time.perf_counter() - t0
                with lock:
                    latencies.append(elapsed)
            except OSError as exc:  # pragma: no cover - failure path
                with lock:
                    errors.append(str(exc))
                return
            if _wave == 0:
                time.sleep(think_time)

    try:
        _wait_for(f"{base}/healthz")
        rng = random.Random(6)
        threads = [
            threading.Thread(target=annotator, args=(token, rng.uniform(0, 125)))
            for token in tokens
        ]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join(timeout=320)
    finally:
        server.send_signal(signal.SIGINT)
        server.wait(timeout=10)

    assert not errors, errors[:3]
    assert len(latencies) == 200
    latencies.sort()
    p99 = latencies[math.ceil(0.99 * len(latencies)) - 1]
    assert p99 <= 1.0, f"p99 latency {p99 * 1000:.0f} ms"
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    note(
        f"criterion 10 PASS: {len(latencies)} responses from 100 annotators, "
        f"p99={p99 * 1000:.1f} ms (median {latencies[len(latencies) // 2] * 1000:.1f} ms) "
        f"in {elapsed:.0f}s"
    )


# -- criterion 11: explicit non-goal ----------------------------------------------------


def test_c11_study_values_not_reproduced():
    """Human-session measurements (annotation times, agreement levels, setup
    times) depend on the humans, not the software; the suite reproduces only
    formulas, protocol semantics, and simulation-backed properties. Criteria
    4-6 cover the statistical machinery with synthetic data instead."""
    note("criterion 11 PASS: human-study measurements are out of scope by design")
